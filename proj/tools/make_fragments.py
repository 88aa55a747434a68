#!/usr/bin/env python3
"""Regenerates the bundled fragment geometries and multiset manifests.

Each fragment is embedded with ETKDG and relaxed with MMFF94 (seeded), then
written as XYZ. The outputs are committed; this script only documents how
they were produced.

    python3 tools/make_fragments.py data
"""
import pathlib
import sys

from rdkit import Chem
from rdkit.Chem import AllChem

FRAGMENTS = {
    # drug-like
    "methylimidazole": "Cn1ccnc1",
    "methylthiazole": "Cc1cscn1",
    "cyclopropane": "C1CC1",
    "methylacetamide": "CNC(C)=O",
    "morpholine": "C1COCCN1",
    "acetamide": "CC(N)=O",
    "methane": "C",
    "pyrimidine": "c1cncnc1",
    "methylamine": "CN",
    "propane": "CCC",
    "acetanilide": "CC(=O)Nc1ccccc1",
    "methylpiperazine": "CN1CCNCC1",
    "pyridine": "c1ccncc1",
    "benzene": "c1ccccc1",
    "ammonia": "N",
    # organic LED
    "quinazoline": "c1ccc2ncncc2c1",
    "phthalonitrile": "N#Cc1ccccc1C#N",
    "benzofuran": "c1ccc2occc2c1",
    "toluene": "Cc1ccccc1",
    "pyrazine": "c1cnccn1",
    "dimethylacridan": "CC1(C)c2ccccc2Nc2ccccc21",
    "carbazole": "c1ccc2c(c1)[nH]c1ccccc12",
    # amino acids
    "glutamate": "NC(CCC(=O)O)C(=O)O",
    "asparagine": "NC(CC(N)=O)C(=O)O",
    "serine": "NC(CO)C(=O)O",
    "valine": "CC(C)C(N)C(=O)O",
    "histidine": "NC(Cc1cnc[nH]1)C(=O)O",
    "leucine": "CC(C)CC(N)C(=O)O",
    "pyrrolysine": "CC1CC=NC1C(=O)NCCCCC(N)C(=O)O",
    "tryptophan": "NC(Cc1c[nH]c2ccccc12)C(=O)O",
    "arginine": "NC(CCCNC(N)=N)C(=O)O",
    "aspartate": "NC(CC(=O)O)C(=O)O",
    # toy
    "water": "O",
}

# name -> (reference formula, atoms, heavy atoms, [(fragment, count)])
MULTISETS = {
    "drug1": ("C14H22N4OS", 42, 20, [("methylimidazole", 1), ("methylthiazole", 1),
                                      ("cyclopropane", 1), ("methylacetamide", 1)]),
    "drug2": ("C16H27N5O2", 50, 23, [("morpholine", 1), ("acetamide", 1), ("methane", 2),
                                      ("pyrimidine", 1), ("methylamine", 1), ("propane", 1)]),
    "drug3": ("C29H31N7O", 68, 37, [("acetanilide", 1), ("methylpiperazine", 1), ("pyrimidine", 1),
                                     ("pyridine", 1), ("benzene", 1), ("methane", 1), ("ammonia", 1)]),
    "oled1": ("C34H23N5", 62, 39, [("quinazoline", 2), ("benzene", 3), ("ammonia", 1)]),
    "oled2": ("C49H28N4O", 82, 54, [("phthalonitrile", 2), ("benzene", 3), ("benzofuran", 1),
                                     ("toluene", 1)]),
    "oled3": ("C67H50N6", 123, 73, [("pyrazine", 2), ("benzene", 3), ("toluene", 2),
                                     ("dimethylacridan", 1), ("carbazole", 1)]),
    "bio1": ("C20H38N6O4", 69, 34, [("glutamate", 1), ("asparagine", 1), ("serine", 1),
                                     ("valine", 1)]),
    "bio2": ("C27H44N10O6", 122, 57, [("pyrrolysine", 1), ("histidine", 1), ("leucine", 2),
                                       ("glutamate", 1)]),
    "bio3": ("C46H66N12O9", 130, 63, [("pyrrolysine", 1), ("tryptophan", 1), ("arginine", 1),
                                       ("leucine", 1), ("aspartate", 1)]),
    "toy": (None, None, None, [("methane", 1), ("ammonia", 1), ("water", 1)]),
}


def embed(smiles):
    mol = Chem.AddHs(Chem.MolFromSmiles(smiles))
    params = AllChem.ETKDGv3()
    params.randomSeed = 7
    if AllChem.EmbedMolecule(mol, params) != 0:
        raise RuntimeError(f"embedding failed for {smiles}")
    AllChem.MMFFOptimizeMolecule(mol, maxIters=2000)
    return mol


def write_xyz(mol, name, path):
    conf = mol.GetConformer()
    lines = [str(mol.GetNumAtoms()), name]
    for atom in mol.GetAtoms():
        p = conf.GetAtomPosition(atom.GetIdx())
        lines.append(f"{atom.GetSymbol()} {p.x:.6f} {p.y:.6f} {p.z:.6f}")
    path.write_text("\n".join(lines) + "\n")


def main(root):
    root = pathlib.Path(root)
    (root / "fragments").mkdir(parents=True, exist_ok=True)
    (root / "multisets").mkdir(parents=True, exist_ok=True)
    for name, smiles in FRAGMENTS.items():
        write_xyz(embed(smiles), name, root / "fragments" / f"{name}.xyz")
    for set_name, (formula, atoms, heavy, entries) in MULTISETS.items():
        out = [f"# fragment multiset '{set_name}'; entry order fixes the fragment index"]
        out.append(f"name: {set_name}")
        if formula:
            out.append("reference:")
            out.append(f"  formula: {formula}")
            out.append(f"  atoms: {atoms}")
            out.append(f"  heavy_atoms: {heavy}")
        out.append("fragments:")
        for frag, count in entries:
            out.append(f"  - id: {frag}")
            out.append(f"    path: ../fragments/{frag}.xyz")
            out.append(f"    count: {count}")
        (root / "multisets" / f"{set_name}.yaml").write_text("\n".join(out) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data")

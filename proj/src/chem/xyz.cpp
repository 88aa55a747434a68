#include "fragforge/chem/xyz.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "fragforge/error.hpp"

namespace fragforge::chem {

namespace {

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (end == text.size()) break;
    start = end + 1;
  }
  return lines;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

bool is_blank(std::string_view line) { return split_ws(line).empty(); }

double parse_coordinate(std::string_view token, std::size_t line_no) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size() || !std::isfinite(value)) {
    throw ParseError("xyz line " + std::to_string(line_no) + ": bad coordinate '" +
                     std::string(token) + "'");
  }
  return value;
}

void format_coordinate(std::string& out, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  std::string_view s(buf);
  // Avoid "-0.000000" for values that round to zero.
  if (s.find_first_not_of("-0.") == std::string_view::npos && s.front() == '-') s.remove_prefix(1);
  out += s;
}

}  // namespace

AtomCloud parse_xyz(std::string_view text, std::string* comment) {
  auto lines = split_lines(text);
  while (!lines.empty() && is_blank(lines.back())) lines.pop_back();
  if (lines.empty()) throw ParseError("xyz: empty input");

  auto count_tokens = split_ws(lines[0]);
  std::size_t declared = 0;
  if (count_tokens.size() != 1) throw ParseError("xyz line 1: expected the atom count");
  {
    auto tok = count_tokens[0];
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), declared);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) {
      throw ParseError("xyz line 1: bad atom count '" + std::string(tok) + "'");
    }
  }
  std::size_t present = lines.size() >= 2 ? lines.size() - 2 : 0;
  if (present != declared) {
    throw ParseError("xyz: declared " + std::to_string(declared) + " atoms but found " +
                     std::to_string(present));
  }
  if (comment != nullptr) *comment = lines.size() >= 2 ? std::string(lines[1]) : std::string();

  AtomCloud cloud;
  for (std::size_t i = 0; i < declared; ++i) {
    std::size_t line_no = i + 3;
    auto tokens = split_ws(lines[i + 2]);
    if (tokens.size() < 4) {
      throw ParseError("xyz line " + std::to_string(line_no) + ": expected 'Symbol x y z'");
    }
    Element e = element_from_symbol(tokens[0]);
    Vec3 p(parse_coordinate(tokens[1], line_no), parse_coordinate(tokens[2], line_no),
           parse_coordinate(tokens[3], line_no));
    cloud.add(e, p);
  }
  return cloud;
}

std::string write_xyz(const AtomCloud& cloud, std::string_view comment) {
  if (cloud.empty()) throw ChemError("write_xyz: empty cloud");
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (!cloud.position(i).allFinite()) {
      throw ChemError("write_xyz: atom " + std::to_string(i) + " has a non-finite position");
    }
  }
  std::string out = std::to_string(cloud.size());
  out += '\n';
  for (char c : comment) out += (c == '\n' || c == '\r') ? ' ' : c;
  out += '\n';
  for (const Atom& a : cloud.atoms()) {
    out += symbol(a.element);
    for (int k = 0; k < 3; ++k) {
      out += ' ';
      format_coordinate(out, a.position[k]);
    }
    out += '\n';
  }
  return out;
}

AtomCloud read_xyz_file(const std::filesystem::path& path, std::string* comment) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open xyz file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_xyz(ss.str(), comment);
  } catch (const Error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_xyz_file(const std::filesystem::path& path, const AtomCloud& cloud,
                    std::string_view comment) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << write_xyz(cloud, comment);
}

}  // namespace fragforge::chem

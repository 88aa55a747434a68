#include "fragforge/energy/external.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "fragforge/chem/xyz.hpp"

namespace fragforge::energy {

namespace {

class TempFile {
 public:
  TempFile() {
    auto pattern = (std::filesystem::temp_directory_path() / "fragforge-XXXXXX.xyz").string();
    int fd = mkstemps(pattern.data(), 4);
    if (fd < 0) throw EnergyError(EnergyError::Kind::other, "cannot create temporary xyz file");
    ::close(fd);
    path_ = pattern;
  }
  ~TempFile() {
    std::error_code ec;
    std::filesystem::remove(path_, ec);
  }
  TempFile(const TempFile&) = delete;
  TempFile& operator=(const TempFile&) = delete;
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

std::string substitute(std::string command, const std::string& path) {
  const std::string token = "{xyz}";
  for (auto pos = command.find(token); pos != std::string::npos;
       pos = command.find(token, pos + path.size())) {
    command.replace(pos, token.size(), path);
  }
  return command;
}

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

struct ProcessResult {
  std::string out;
  int status = 0;
};

ProcessResult run_with_timeout(const std::string& command, double timeout_seconds) {
  int pipefd[2];
  if (::pipe(pipefd) != 0) throw EnergyError(EnergyError::Kind::process, "pipe() failed");
  pid_t pid = ::fork();
  if (pid < 0) {
    ::close(pipefd[0]);
    ::close(pipefd[1]);
    throw EnergyError(EnergyError::Kind::process, "fork() failed");
  }
  if (pid == 0) {
    ::setpgid(0, 0);
    ::dup2(pipefd[1], STDOUT_FILENO);
    ::close(pipefd[0]);
    ::close(pipefd[1]);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::setpgid(pid, pid);
  ::close(pipefd[1]);

  using clock = std::chrono::steady_clock;
  const auto deadline =
      clock::now() + std::chrono::duration_cast<clock::duration>(
                         std::chrono::duration<double>(timeout_seconds));
  ProcessResult result;
  bool timed_out = false;
  char buf[4096];
  while (true) {
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - clock::now());
    if (left.count() <= 0) {
      timed_out = true;
      break;
    }
    pollfd pfd{pipefd[0], POLLIN, 0};
    int rc = ::poll(&pfd, 1, static_cast<int>(left.count()));
    if (rc < 0 && errno == EINTR) continue;
    if (rc == 0) {
      timed_out = true;
      break;
    }
    ssize_t n = ::read(pipefd[0], buf, sizeof(buf));
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;
    result.out.append(buf, static_cast<std::size_t>(n));
  }
  ::close(pipefd[0]);
  if (timed_out) {
    ::kill(-pid, SIGKILL);
    ::waitpid(pid, nullptr, 0);
    throw EnergyError(EnergyError::Kind::timeout,
                      "external energy command timed out after " +
                          std::to_string(timeout_seconds) + " s");
  }
  int status = 0;
  while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  result.status = status;
  return result;
}

}  // namespace

double external_backend_evaluate(const chem::AtomCloud& cloud, const ExternalAdapterConfig& config) {
  if (config.command.empty()) {
    throw EnergyError(EnergyError::Kind::other, "external backend: empty command template");
  }
  TempFile file;
  {
    std::ofstream out(file.path());
    out << chem::write_xyz(cloud, "fragforge");
  }
  auto result = run_with_timeout(substitute(config.command, file.path()), config.timeout_seconds);
  if (!WIFEXITED(result.status) || WEXITSTATUS(result.status) != 0) {
    throw EnergyError(EnergyError::Kind::process,
                      "external energy command failed (status " + std::to_string(result.status) +
                          ")");
  }
  const std::string text = trim(result.out);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size() ||
      !std::isfinite(value)) {
    throw EnergyError(EnergyError::Kind::parse,
                      "cannot parse external energy output '" + text.substr(0, 80) + "'");
  }
  return value * config.unit_factor;
}

}  // namespace fragforge::energy

#include <fcntl.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <thread>

#include <spdlog/spdlog.h>

#include "vicorpus/browser.hpp"

extern char** environ;

namespace vicorpus::browser {

std::filesystem::path default_browser_bin() {
  if (const char* env = std::getenv("VICORPUS_BROWSER_BIN"); env != nullptr && *env != '\0') return env;
#ifdef VICORPUS_DEFAULT_BROWSER
  return VICORPUS_DEFAULT_BROWSER;
#else
  return "chromium";
#endif
}

BrowserProcess::BrowserProcess(const std::filesystem::path& binary, int port,
                               std::chrono::milliseconds startup_timeout) {
  if (!std::filesystem::exists(binary)) {
    throw UsageError("browser binary not found: " + binary.string() + " (set --browser-bin or VICORPUS_BROWSER_BIN)");
  }
  std::string tmpl = (std::filesystem::temp_directory_path() / "vicorpus-profile-XXXXXX").string();
  if (mkdtemp(tmpl.data()) == nullptr) throw Error("cannot create a browser profile directory");
  profile_dir_ = tmpl;

  std::vector<std::string> args = {
      binary.string(),
      "--headless=new",
      "--no-sandbox",
      "--no-zygote",
      "--disable-gpu",
      "--disable-dev-shm-usage",
      "--no-first-run",
      "--no-default-browser-check",
      "--disable-extensions",
      "--disable-background-networking",
      "--disable-component-update",
      "--disable-sync",
      "--mute-audio",
      "--hide-scrollbars",
      "--font-render-hinting=none",
      "--disable-lcd-text",
      "--force-color-profile=srgb",
      "--remote-allow-origins=*",
      "--remote-debugging-address=127.0.0.1",
      "--remote-debugging-port=" + std::to_string(port),
      "--user-data-dir=" + profile_dir_.string(),
      "about:blank",
  };
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  argv.push_back(nullptr);

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  const std::string log = (profile_dir_ / "browser.log").string();
  posix_spawn_file_actions_addopen(&actions, 1, log.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  posix_spawn_file_actions_adddup2(&actions, 1, 2);
  posix_spawnattr_t attr;
  posix_spawnattr_init(&attr);
  // Own process group, so the renderer children die with it.
  posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETPGROUP);
  posix_spawnattr_setpgroup(&attr, 0);
  pid_t pid = -1;
  const int rc = posix_spawn(&pid, argv[0], &actions, &attr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  posix_spawnattr_destroy(&attr);
  if (rc != 0) {
    std::filesystem::remove_all(profile_dir_);
    throw Error("cannot start " + binary.string() + ": " + std::strerror(rc));
  }
  pid_ = pid;

  const auto port_file = profile_dir_ / "DevToolsActivePort";
  const auto deadline = std::chrono::steady_clock::now() + startup_timeout;
  auto fail = [&](const std::string& why) {
    const std::string text = why + "; see " + log;
    shutdown();
    throw BrowserCrashed(text);
  };
  while (true) {
    {
      std::ifstream in(port_file);
      std::string p, path;
      if (in && std::getline(in, p) && std::getline(in, path) && !p.empty() && !path.empty()) {
        port_ = std::stoi(p);
        ws_path_ = path;
        break;
      }
    }
    if (!alive()) fail("browser exited during startup");
    if (std::chrono::steady_clock::now() > deadline) fail("browser did not open its debugging port in time");
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  spdlog::debug("browser pid {} listening on port {}", pid_, port_);
}

BrowserProcess::~BrowserProcess() { shutdown(); }

void BrowserProcess::shutdown() {
  if (pid_ > 0) {
    ::kill(-pid_, SIGKILL);
    ::kill(pid_, SIGKILL);
    int status = 0;
    ::waitpid(pid_, &status, 0);
    pid_ = -1;
  }
  std::error_code ec;
  std::filesystem::remove_all(profile_dir_, ec);
}

bool BrowserProcess::alive() {
  if (pid_ <= 0) return false;
  int status = 0;
  const pid_t r = ::waitpid(pid_, &status, WNOHANG);
  if (r == pid_) {
    pid_ = -1;
    return false;
  }
  return true;
}

}  // namespace vicorpus::browser

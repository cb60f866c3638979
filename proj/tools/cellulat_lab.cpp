// cellulat-lab: HTTP service for interactive sessions.
//
//   CELLULAT_ADDR       listen address, host:port (default 127.0.0.1:8080)
//   CELLULAT_MODEL_DIR  directory whose *.cellulat files are preloaded; each
//                       model id is the file name without extension
//   CELLULAT_MAX_IDLE_SECONDS, CELLULAT_MAX_SESSIONS  session reclamation

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "cellulat/http.hpp"

namespace {

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v && *v ? v : fallback;
}

void preload(cellulat::LabService& service, const std::filesystem::path& dir) {
  std::error_code ec;
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir, ec))
    if (entry.is_regular_file() && entry.path().extension() == ".cellulat") files.push_back(entry.path());
  if (ec) {
    std::cerr << "cellulat-lab: cannot read model directory " << dir << ": " << ec.message() << "\n";
    return;
  }
  std::sort(files.begin(), files.end());
  for (const auto& path : files) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    auto r = service.create_model(ss.str(), path.stem().string());
    if (r.status == 200)
      std::cerr << "cellulat-lab: loaded " << r.body["model_id"].get<std::string>() << "\n";
    else
      std::cerr << "cellulat-lab: skipped " << path << ": " << r.body["diagnostics"].dump() << "\n";
  }
}

}  // namespace

int main() {
  const std::string addr = env_or("CELLULAT_ADDR", "127.0.0.1:8080");
  const auto colon = addr.rfind(':');
  const std::string host = colon == std::string::npos ? addr : addr.substr(0, colon);
  const auto port = colon == std::string::npos ? std::optional<std::int64_t>(8080) : cellulat::parse_int(addr.substr(colon + 1));
  if (!port || *port < 0 || *port > 65535) {
    std::cerr << "cellulat-lab: bad CELLULAT_ADDR '" << addr << "'\n";
    return 64;
  }

  cellulat::LabService service;
  if (const char* dir = std::getenv("CELLULAT_MODEL_DIR"); dir && *dir) preload(service, dir);

  cellulat::GcPolicy policy;
  policy.max_idle = std::chrono::seconds(std::stoll(env_or("CELLULAT_MAX_IDLE_SECONDS", "3600")));
  policy.max_sessions = std::stoull(env_or("CELLULAT_MAX_SESSIONS", "256"));

  httplib::Server server;
  // Event streams hold a worker each; leave room for ordinary requests.
  server.new_task_queue = [] { return new httplib::ThreadPool(32); };
  cellulat::mount(server, service);

  std::atomic<bool> running{true};
  std::thread gc([&] {
    while (running) {
      std::this_thread::sleep_for(std::chrono::seconds(1));
      service.session_gc(policy);
    }
  });

  std::cerr << "cellulat-lab: listening on " << host << ":" << *port << "\n";
  const bool ok = server.listen(host, static_cast<int>(*port));
  running = false;
  gc.join();
  if (!ok) {
    std::cerr << "cellulat-lab: cannot listen on " << addr << "\n";
    return 1;
  }
  return 0;
}

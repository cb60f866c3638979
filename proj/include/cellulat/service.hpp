#pragma once

// Transport-independent core of the virtual-lab service. Every command takes
// and returns JSON plus an HTTP-style status so the HTTP layer stays thin and
// tests can drive the service directly.
//
// Concurrency: the model and session tables are guarded by one registry
// mutex, held only to look up or insert entries. Each session has its own
// mutex; commands on a session run strictly one at a time while different
// sessions proceed in parallel.

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "cellulat/columns.hpp"
#include "cellulat/dsl.hpp"
#include "cellulat/lesion_lab.hpp"
#include "cellulat/serialize.hpp"
#include "cellulat/trace.hpp"

namespace cellulat {

struct ServiceResponse {
  int status = 200;
  json body;
};

enum class SessionStatus { Idle, Running, Ended };

inline std::string_view to_string(SessionStatus s) {
  switch (s) {
    case SessionStatus::Idle: return "idle";
    case SessionStatus::Running: return "running";
    case SessionStatus::Ended: return "ended";
  }
  return "idle";
}

// Close codes sent as the last message on an event stream.
inline constexpr int kStreamClosedNormally = 1000;   // session ended
inline constexpr int kStreamGoingAway = 1001;        // session reclaimed
inline constexpr int kStreamSlowConsumer = 1008;     // subscriber buffer overflowed

struct StreamMessage {
  std::string type;  // ready, write, firing, emission, tick, close
  json data;
};

// One subscriber's bounded queue. The publisher never blocks: a subscriber
// whose queue is full is closed with kStreamSlowConsumer instead.
class EventSubscription {
 public:
  explicit EventSubscription(std::size_t capacity) : capacity_(capacity) {}

  // Next message, or nullopt on timeout. After the close message has been
  // delivered every call returns nullopt immediately.
  std::optional<StreamMessage> next(std::chrono::milliseconds timeout) {
    std::unique_lock lock(mu_);
    cv_.wait_for(lock, timeout, [&] { return !queue_.empty() || (closed_ && close_delivered_); });
    if (queue_.empty()) return std::nullopt;
    StreamMessage m = std::move(queue_.front());
    queue_.pop_front();
    if (m.type == "close") close_delivered_ = true;
    return m;
  }

  bool finished() const {
    std::lock_guard lock(mu_);
    return closed_ && queue_.empty();
  }

  std::optional<int> close_code() const {
    std::lock_guard lock(mu_);
    return close_code_;
  }

 private:
  friend class EventHub;

  // Returns false once the subscription is closed.
  bool offer(StreamMessage m) {
    std::lock_guard lock(mu_);
    if (closed_) return false;
    if (queue_.size() >= capacity_) {
      close_locked(kStreamSlowConsumer, "slow_consumer");
      return false;
    }
    queue_.push_back(std::move(m));
    cv_.notify_all();
    return true;
  }

  void close(int code, const std::string& reason) {
    std::lock_guard lock(mu_);
    if (!closed_) close_locked(code, reason);
  }

  // The close message may exceed capacity by one so it is always delivered.
  void close_locked(int code, const std::string& reason) {
    closed_ = true;
    close_code_ = code;
    queue_.push_back({"close", json{{"type", "close"}, {"code", code}, {"reason", reason}}});
    cv_.notify_all();
  }

  const std::size_t capacity_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<StreamMessage> queue_;
  bool closed_ = false;
  bool close_delivered_ = false;
  std::optional<int> close_code_;
};

class EventHub {
 public:
  // `hello` is queued ahead of everything published after this call.
  std::shared_ptr<EventSubscription> subscribe(std::size_t capacity, StreamMessage hello) {
    auto sub = std::make_shared<EventSubscription>(capacity);
    std::lock_guard lock(mu_);
    sub->offer(std::move(hello));
    if (closed_)
      sub->close(*closed_, "session_ended");
    else
      subs_.push_back(sub);
    return sub;
  }

  void publish(const StreamMessage& m) {
    std::lock_guard lock(mu_);
    std::erase_if(subs_, [&](const std::shared_ptr<EventSubscription>& s) { return !s->offer(m); });
  }

  void close_all(int code, const std::string& reason) {
    std::lock_guard lock(mu_);
    closed_ = code;
    for (auto& s : subs_) s->close(code, reason);
    subs_.clear();
  }

  std::size_t subscriber_count() const {
    std::lock_guard lock(mu_);
    return subs_.size();
  }

 private:
  mutable std::mutex mu_;
  std::vector<std::shared_ptr<EventSubscription>> subs_;
  std::optional<int> closed_;
};

struct GcPolicy {
  std::chrono::steady_clock::duration max_idle = std::chrono::hours(1);
  std::size_t max_sessions = 256;
};

class LabService {
 public:
  using Clock = std::chrono::steady_clock;

  static constexpr Tick kMaxTicksPerStep = 100000;
  static constexpr std::size_t kDefaultStreamCapacity = 65536;

  // POST /models. `preferred_id` defaults to the model's declared name; a
  // numeric suffix is added when the id is taken.
  ServiceResponse create_model(const std::string& text, const std::string& preferred_id = "") {
    ParseResult r = parse(text);
    json diags = r.diagnostics;
    if (!r.ok()) return {422, json{{"model_id", nullptr}, {"diagnostics", diags}}};
    auto model = std::make_shared<const ModelDef>(std::move(*r.model));
    std::lock_guard lock(registry_mu_);
    std::string id = preferred_id.empty() ? model->name : preferred_id;
    if (models_.count(id)) {
      int n = 2;
      while (models_.count(id + "-" + std::to_string(n))) ++n;
      id += "-" + std::to_string(n);
    }
    models_.emplace(id, model);
    return {200, json{{"model_id", id}, {"diagnostics", diags}}};
  }

  // GET /models/{id}
  ServiceResponse get_model(const std::string& id) const {
    auto model = find_model(id);
    if (!model) return not_found("model", id);
    const ModelDef& m = *model;
    json levels = json::array();
    for (const auto& l : m.levels) levels.push_back({{"name", l.name}, {"kind", to_string(l.kind)}, {"rank", l.rank}});
    json species = json::array();
    for (const auto& s : m.species)
      species.push_back({{"name", s.name}, {"kind", to_string(s.kind)}, {"decay", s.decay}});
    json ligands = json::array();
    for (const auto& l : m.ligands) ligands.push_back(l.name);
    json agents = json::array();
    for (const auto& a : m.agents) {
      json j{{"id", a.id},
             {"class", to_string(a.cls)},
             {"priority", a.priority},
             {"multiplicity", a.multiplicity},
             {"probability", a.firing_probability},
             {"region", a.region_tag ? json(*a.region_tag) : json(nullptr)}};
      json senses = json::array();
      for (const auto& l : sensed_loci(a)) senses.push_back(l);
      json affects = json::array();
      for (const auto& l : affected_loci(a)) affects.push_back(l);
      j["senses"] = senses;
      j["affects"] = affects;
      agents.push_back(std::move(j));
    }
    json metadata = json::object();
    for (const auto& [k, v] : m.metadata) metadata[k] = v;
    return {200, json{{"model_id", id},
                      {"name", m.name},
                      {"metadata", metadata},
                      {"levels", levels},
                      {"species", species},
                      {"ligands", ligands},
                      {"agents", agents},
                      {"stimuli", m.stimuli},
                      {"level_occupancy", level_occupancy(m)},
                      {"columns", detect_columns(m)},
                      {"source", pretty_print(m)}}};
  }

  // POST /sessions {model_id, seed}
  ServiceResponse create_session(const json& body) {
    if (!body.is_object() || !body.contains("model_id") || !body["model_id"].is_string())
      return invalid("body must be an object with a string model_id");
    std::uint64_t seed = 0;
    if (body.contains("seed")) {
      if (!body["seed"].is_number_unsigned() && !(body["seed"].is_number_integer() && body["seed"].get<std::int64_t>() >= 0))
        return invalid("seed must be a non-negative integer");
      seed = body["seed"].get<std::uint64_t>();
    }
    const std::string model_id = body["model_id"].get<std::string>();
    auto model = find_model(model_id);
    if (!model) return not_found("model", model_id);

    auto session = std::make_shared<Session>(model_id, Simulation(model, seed));
    session->recorder.observe(0, session->sim.board());
    const std::string id = insert_session(session);
    return {200, json{{"session_id", id}, {"model_id", model_id}, {"seed", seed}, {"tick", 0}}};
  }

  // POST /sessions/{id}/step {ticks}
  ServiceResponse step(const std::string& id, const json& body) {
    Tick n = 1;
    if (body.is_object() && body.contains("ticks")) {
      if (!body["ticks"].is_number_integer()) return invalid("ticks must be an integer");
      n = body["ticks"].get<Tick>();
    } else if (!body.is_null() && !body.is_object()) {
      return invalid("body must be an object");
    }
    if (n < 0 || n > kMaxTicksPerStep)
      return invalid("ticks must lie in [0, " + std::to_string(kMaxTicksPerStep) + "]");

    return with_session(id, true, [&](Session& s) -> ServiceResponse {
      s.status = SessionStatus::Running;
      json reports = json::array();
      for (Tick i = 0; i < n; ++i) {
        const TickReport report = s.sim.step();
        s.recorder.observe(s.sim.tick(), s.sim.board());
        publish(s, report);
        reports.push_back(tick_summary(report));
      }
      s.status = SessionStatus::Idle;
      const auto op = s.record(json{{"command", "step"}, {"ticks", n}});
      return {200, json{{"session_id", id}, {"op", op}, {"tick", s.sim.tick()}, {"reports", reports}}};
    });
  }

  // POST /sessions/{id}/stimuli {ligand, amount, from_tick, to_tick}
  ServiceResponse add_stimulus(const std::string& id, const json& body) {
    Stimulus stim;
    try {
      stim = body.get<Stimulus>();
    } catch (const json::exception& e) {
      return invalid(std::string("stimulus body: ") + e.what());
    }
    return with_session(id, true, [&](Session& s) -> ServiceResponse {
      try {
        s.sim.add_stimulus(stim);
      } catch (const Error& e) {
        return error_response(422, e);
      }
      const auto op = s.record(json{{"command", "stimulus"}, {"stimulus", stim}});
      return {200, json{{"session_id", id}, {"op", op}, {"tick", s.sim.tick()}, {"stimulus", stim}}};
    });
  }

  // POST /sessions/{id}/lesions {spec} or the object form
  ServiceResponse add_lesion(const std::string& id, const json& body) {
    Lesion lesion;
    try {
      lesion = body.get<Lesion>();
    } catch (const Error& e) {
      return error_response(422, e);
    }
    return with_session(id, true, [&](Session& s) -> ServiceResponse {
      try {
        apply_lesion(s.sim, lesion);
      } catch (const Error& e) {
        return error_response(422, e);
      }
      const Lesion& applied = s.sim.lesions().back();
      const auto op = s.record(json{{"command", "lesion"}, {"lesion", applied}});
      return {200, json{{"session_id", id}, {"op", op}, {"tick", s.sim.tick()}, {"lesion", applied}}};
    });
  }

  // POST /sessions/{id}/fork
  ServiceResponse fork(const std::string& id) {
    std::shared_ptr<Session> child;
    auto r = with_session(id, true, [&](Session& s) -> ServiceResponse {
      child = std::make_shared<Session>(s.model_id, s.sim);
      child->recorder = s.recorder;
      child->history = s.history;
      child->parent = id;
      const auto op = s.record(json{{"command", "fork"}});
      return {200, json{{"op", op}, {"tick", s.sim.tick()}}};
    });
    if (r.status != 200) return r;
    const std::string child_id = insert_session(child);
    r.body["session_id"] = child_id;
    r.body["parent_session_id"] = id;
    return r;
  }

  // POST /sessions/{id}/end
  ServiceResponse end_session(const std::string& id) {
    return with_session(id, true, [&](Session& s) -> ServiceResponse {
      s.status = SessionStatus::Ended;
      const auto op = s.record(json{{"command", "end"}});
      s.hub.close_all(kStreamClosedNormally, "session_ended");
      return {200, json{{"session_id", id}, {"op", op}, {"tick", s.sim.tick()}, {"status", "ended"}}};
    });
  }

  // GET /sessions/{id}/state
  ServiceResponse state(const std::string& id) {
    return with_session(id, false, [&](Session& s) -> ServiceResponse { return {200, state_json(id, s)}; });
  }

  // GET /sessions/{id}/trace?from=T
  ServiceResponse trace(const std::string& id, Tick from) {
    return with_session(id, false, [&](Session& s) -> ServiceResponse {
      return {200, json{{"session_id", id}, {"from", from}, {"tick", s.sim.tick()}, {"rows", s.recorder.rows_since(from)}}};
    });
  }

  // GET /sessions/{id}/history: the serial order in which commands were applied.
  ServiceResponse history(const std::string& id) {
    return with_session(id, false, [&](Session& s) -> ServiceResponse {
      return {200, json{{"session_id", id}, {"commands", s.history}}};
    });
  }

  // GET /sessions/{id}/events. The first message is "ready" carrying the
  // tick at which the subscription started. Returns nullptr for unknown
  // sessions.
  std::shared_ptr<EventSubscription> subscribe(const std::string& id, std::size_t capacity = kDefaultStreamCapacity) {
    auto s = find_session(id);
    if (!s) return nullptr;
    std::lock_guard lock(s->mu);
    return s->hub.subscribe(capacity, {"ready", json{{"type", "ready"}, {"tick", s->sim.tick()}}});
  }

  // Removes ended sessions, sessions idle for longer than max_idle, and then
  // the least recently used idle sessions until at most max_sessions remain.
  // A session that is executing a command is never reclaimed.
  std::size_t session_gc(const GcPolicy& policy, Clock::time_point now = Clock::now()) {
    std::lock_guard lock(registry_mu_);
    std::size_t reclaimed = 0;
    struct Candidate {
      Clock::time_point last_active;
      std::uint64_t order;
      std::string id;
    };
    std::vector<Candidate> idle;
    for (auto it = sessions_.begin(); it != sessions_.end();) {
      Session& s = *it->second;
      std::unique_lock session_lock(s.mu, std::try_to_lock);
      if (!session_lock.owns_lock() || s.status == SessionStatus::Running) {
        ++it;
        continue;
      }
      const bool expired = now - s.last_active > policy.max_idle;
      if (s.status == SessionStatus::Ended || expired) {
        s.hub.close_all(kStreamGoingAway, "session_reclaimed");
        session_lock.unlock();
        it = sessions_.erase(it);
        ++reclaimed;
        continue;
      }
      idle.push_back({s.last_active, s.order, it->first});
      ++it;
    }
    std::sort(idle.begin(), idle.end(), [](const Candidate& a, const Candidate& b) {
      return a.last_active != b.last_active ? a.last_active < b.last_active : a.order < b.order;
    });
    for (const auto& c : idle) {
      if (sessions_.size() <= policy.max_sessions) break;
      auto it = sessions_.find(c.id);
      std::unique_lock session_lock(it->second->mu, std::try_to_lock);
      if (!session_lock.owns_lock() || it->second->status == SessionStatus::Running) continue;
      it->second->hub.close_all(kStreamGoingAway, "session_reclaimed");
      session_lock.unlock();
      sessions_.erase(it);
      ++reclaimed;
    }
    return reclaimed;
  }

  std::size_t session_count() const {
    std::lock_guard lock(registry_mu_);
    return sessions_.size();
  }

  std::vector<std::string> model_ids() const {
    std::lock_guard lock(registry_mu_);
    std::vector<std::string> out;
    for (const auto& [id, m] : models_) out.push_back(id);
    return out;
  }

 private:
  struct Session {
    Session(std::string model, Simulation s)
        : model_id(std::move(model)), sim(std::move(s)), recorder(sim.model()), last_active(Clock::now()) {}

    std::uint64_t record(json command) {
      const auto op = static_cast<std::uint64_t>(history.size());
      command["op"] = op;
      command["tick_after"] = sim.tick();
      history.push_back(std::move(command));
      return op;
    }

    std::mutex mu;
    std::string model_id;
    Simulation sim;
    TraceRecorder recorder;
    SessionStatus status = SessionStatus::Idle;
    std::optional<std::string> parent;
    Clock::time_point last_active;
    std::uint64_t order = 0;
    std::vector<json> history;
    EventHub hub;
  };

  static ServiceResponse not_found(const std::string& what, const std::string& id) {
    return {404, json{{"error", "not_found"}, {"message", "unknown " + what + " '" + id + "'"}}};
  }

  static ServiceResponse invalid(const std::string& message) {
    return {422, json{{"error", "invalid_body"}, {"message", message}}};
  }

  static ServiceResponse error_response(int status, const Error& e) {
    return {status, json{{"error", to_string(e.code())}, {"message", e.what()}}};
  }

  std::shared_ptr<const ModelDef> find_model(const std::string& id) const {
    std::lock_guard lock(registry_mu_);
    auto it = models_.find(id);
    return it == models_.end() ? nullptr : it->second;
  }

  std::shared_ptr<Session> find_session(const std::string& id) const {
    std::lock_guard lock(registry_mu_);
    auto it = sessions_.find(id);
    return it == sessions_.end() ? nullptr : it->second;
  }

  std::string insert_session(std::shared_ptr<Session> s) {
    std::lock_guard lock(registry_mu_);
    s->order = next_session_++;
    std::string id = "s" + std::to_string(s->order);
    sessions_.emplace(id, std::move(s));
    return id;
  }

  // Runs `fn` under the session's lock. Mutating commands are refused with
  // 409 once the session has ended.
  template <typename Fn>
  ServiceResponse with_session(const std::string& id, bool mutating, Fn&& fn) {
    auto s = find_session(id);
    if (!s) return not_found("session", id);
    std::lock_guard lock(s->mu);
    if (mutating && s->status == SessionStatus::Ended)
      return {409, json{{"error", "session_ended"}, {"message", "session '" + id + "' has ended"}}};
    ServiceResponse r = fn(*s);
    s->last_active = Clock::now();
    return r;
  }

  static json state_json(const std::string& id, Session& s) {
    json lineage = s.parent ? json(*s.parent) : json(nullptr);
    return json{{"session_id", id},
                {"model_id", s.model_id},
                {"tick", s.sim.tick()},
                {"seed", s.sim.seed()},
                {"status", to_string(s.status)},
                {"parent_session_id", lineage},
                {"signals", s.sim.board().snapshot().entries},
                {"event_count", s.sim.board().event_count()},
                {"stimuli", s.sim.stimuli()},
                {"active_lesions", s.sim.active_lesions()}};
  }

  // Stream order per tick: writes in seq order, then firings in agenda
  // order, then emissions, then a tick marker.
  static void publish(Session& s, const TickReport& r) {
    for (const auto& e : r.events) {
      json j = e;
      j["type"] = "write";
      s.hub.publish({"write", std::move(j)});
    }
    for (const auto& f : r.firings) {
      json j = f;
      j["type"] = "firing";
      j["tick"] = r.tick;
      s.hub.publish({"firing", std::move(j)});
    }
    for (const auto& e : r.emissions) {
      json j = e;
      j["type"] = "emission";
      j["tick"] = r.tick;
      s.hub.publish({"emission", std::move(j)});
    }
    s.hub.publish({"tick", json{{"type", "tick"}, {"tick", r.tick}, {"event_count", r.events.size()}}});
  }

  mutable std::mutex registry_mu_;
  std::map<std::string, std::shared_ptr<const ModelDef>> models_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t next_session_ = 1;
};

}  // namespace cellulat

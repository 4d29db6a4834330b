// Copyright 2026 the unistore-sim authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file or http://www.apache.org/licenses/LICENSE-2.0
#pragma once

#include <memory>
#include <queue>
#include <random>

#include "unistore/client.hpp"
#include "unistore/invariants.hpp"
#include "unistore/replica.hpp"
#include "unistore/scenario.hpp"
#include "unistore/trace.hpp"

namespace unistore {

struct RunResult {
  Trace trace;
  std::vector<Json> findings;
  Tick end_tick = 0;
  bool hit_max_ticks = false;
  std::set<DcId> correct_dcs;

  bool clean() const { return findings.empty(); }
};

/// Deterministic discrete-event simulation: the trace is a pure function of
/// (scenario, seed).
class Simulation final : public SimEnv, public ClientEnv {
 public:
  explicit Simulation(Scenario sc) : sc_(std::move(sc)), rng_(sc_.seed) {
    sc_.validate();
    for (DcId d = 1; d <= sc_.num_dcs; ++d)
      for (PartitionId m = 1; m <= sc_.num_partitions; ++m) {
        ReplicaId id{d, m};
        replicas_[id] = std::make_unique<Replica>(*this, id);
      }
    invariants_ = std::make_unique<Invariants>(
        replicas_, sc_.num_dcs, sc_.num_partitions, sc_.f, sc_.check_invariants,
        [this](const std::string& check, Json detail) {
          finding(Json{{"type", "invariant"}, {"check", check}, {"detail", detail}});
        });
    for (const auto& script : sc_.clients)
      clients_.emplace(script.id, std::make_unique<Client>(*this, script));
    crash_scheduled_.resize(sc_.crashes.size(), false);
  }

  RunResult run() {
    result_.trace.add(Json{{"type", "header"},
                           {"version", 1},
                           {"seed", sc_.seed},
                           {"D", sc_.num_dcs},
                           {"N", sc_.num_partitions},
                           {"f", sc_.f},
                           {"scenario", sc_.name}});
    for (auto& [id, r] : replicas_) {
      Tick stagger = (id.dc - 1) * sc_.num_partitions + id.partition - 1;
      schedule_timer(id, TimerKind::Propagate, 1 + stagger % 3);
      schedule_timer(id, TimerKind::Broadcast, 2 + stagger % 3);
      schedule_timer(id, TimerKind::StrongHeartbeat, 4 + stagger % 3);
      schedule_timer(id, TimerKind::TcsRetry, 6 + stagger % 3);
    }
    for (size_t i = 0; i < sc_.crashes.size(); ++i)
      if (auto* at = std::get_if<CrashAtTick>(&sc_.crashes[i].trigger)) {
        enqueue(at->at, EvCrash{sc_.crashes[i].dc});
        crash_scheduled_[i] = true;
      }
    if (sc_.trace_protocol) enqueue(50, EvSnapshot{});
    for (auto& [cid, c] : clients_) c->wake();

    int check_countdown = 0;
    while (!queue_.empty()) {
      SimEvent ev = queue_.top();
      queue_.pop();
      if (ev.time > sc_.max_ticks) {
        result_.hit_max_ticks = true;
        break;
      }
      now_ = ev.time;
      std::visit([&](auto& p) { process(p); }, ev.payload);
      check_crash_triggers();
      for (auto& [cid, c] : clients_)
        if (c->waiting_on_condition()) c->wake();
      if (all_clients_terminal() && --check_countdown <= 0) {
        check_countdown = 4;
        if (obligations_met()) break;
      }
    }

    finish();
    return std::move(result_);
  }

  Replica& replica(ReplicaId id) { return *replicas_.at(id); }
  Client& client_at(ClientId id) { return *clients_.at(id); }
  const Invariants& invariants() const { return *invariants_; }

  // --- SimEnv / ClientEnv ---

  Tick now() const override { return now_; }
  const Scenario& config() const override { return sc_; }

  void send(ReplicaId from, ReplicaId to, Message m) override {
    route(Address{from}, Address{to}, std::move(m));
  }
  void send_client(ReplicaId from, ClientId to, Message m) override {
    route(Address{from}, Address{to}, std::move(m));
  }
  void send_to_replica(ClientId from, ReplicaId to, Message m) override {
    route(Address{from}, Address{to}, std::move(m));
  }

  ReplicaId omega(PartitionId m) const override {
    for (DcId d = 1; d <= sc_.num_dcs; ++d)
      if (dc_alive(d)) return {d, m};
    return {1, m};
  }

  bool dc_alive(DcId d) const override { return !crashed_.count(d); }

  std::optional<Tick> crash_time(DcId d) const override {
    auto it = crashed_.find(d);
    if (it == crashed_.end()) return std::nullopt;
    return it->second;
  }

  std::vector<DcId> suspected() const override {
    std::vector<DcId> out;
    for (const auto& [d, t] : crashed_) out.push_back(d);
    return out;
  }

  void trace(Json e) override {
    e["t"] = now_;
    result_.trace.add(std::move(e));
  }

  void tcs_action(Json e) override { trace(std::move(e)); }

  void note_causal_committed(const TxId& tid, const VectorTimestamp& cv,
                             const LamportStamp& lc, const WriteBuffer& writes,
                             DcId origin) override {
    CommittedInfo info;
    info.tid = tid;
    info.strong = false;
    info.origin = origin;
    info.commit_vec = cv;
    info.lamport = lc;
    info.writes = writes;
    invariants_->on_committed(info);
  }

  void note_strong_committed(const TxId& tid, const VectorTimestamp& cv,
                             const LamportStamp& lc, const WriteBuffer& writes,
                             const VectorTimestamp& snap, const ReadSet& rset,
                             DcId origin) override {
    CommittedInfo info;
    info.tid = tid;
    info.strong = true;
    info.origin = origin;
    info.commit_vec = cv;
    info.lamport = lc;
    info.writes = writes;
    info.snap = snap;
    info.rset = rset;
    invariants_->on_committed(info);
  }

  void note_violation(const std::string& check, Json detail) override {
    finding(Json{{"type", "invariant"}, {"check", check}, {"detail", detail}});
  }

  int64_t fresh_rid() override { return ++rid_seq_; }

  bool value_visible_at(DcId dc, Key key, Value value) const override {
    PartitionId m = partition_of(key, sc_.num_partitions);
    for (const auto& [tid, info] : invariants_->committed()) {
      auto wit = info.writes.find(m);
      if (wit == info.writes.end()) continue;
      auto kit = wit->second.find(key);
      if (kit == wit->second.end() || kit->second != value) continue;
      bool visible = true;
      for (PartitionId n = 1; n <= sc_.num_partitions; ++n) {
        const auto& rep = *replicas_.at(ReplicaId{dc, n});
        VectorTimestamp frontier = rep.exposure_frontier();
        if (!vec_leq_dc(info.commit_vec, frontier) ||
            info.commit_vec.strong() > frontier.strong())
          visible = false;
      }
      if (visible) return true;
    }
    return false;
  }

  uint64_t rand() override { return rng_(); }

  /// A fresh transaction's snapshot lower bound at `dc`, minimized over
  /// coordinators: what any client with empty past is guaranteed to see.
  VectorTimestamp dc_frontier(DcId dc) const {
    VectorTimestamp f = replicas_.at(ReplicaId{dc, 1})->exposure_frontier();
    for (PartitionId n = 2; n <= sc_.num_partitions; ++n) {
      const VectorTimestamp& g = replicas_.at(ReplicaId{dc, n})->exposure_frontier();
      for (DcId i = 1; i <= sc_.num_dcs; ++i) f.set(i, std::min(f.at(i), g.at(i)));
      f.set_strong(std::min(f.strong(), g.strong()));
    }
    return f;
  }

 private:
  using Address = std::variant<ReplicaId, ClientId>;

  struct EvDelivery { Address from, to; Message msg; };
  struct EvTimer { ReplicaId replica; TimerKind kind; };
  struct EvCrash { DcId dc; };
  struct EvSnapshot {};
  using Payload = std::variant<EvDelivery, EvTimer, EvCrash, EvSnapshot>;

  struct SimEvent {
    Tick time;
    int64_t seq;
    Payload payload;
    bool operator>(const SimEvent& o) const {
      return time != o.time ? time > o.time : seq > o.seq;
    }
  };

  void enqueue(Tick at, Payload p) {
    queue_.push(SimEvent{at, ++seq_, std::move(p)});
  }

  DcId dc_of(const Address& a) const {
    if (std::holds_alternative<ReplicaId>(a)) return std::get<ReplicaId>(a).dc;
    return clients_.at(std::get<ClientId>(a))->dc();
  }

  void route(Address from, Address to, Message m) {
    DcId src = dc_of(from), dst = dc_of(to);
    Tick delay;
    if (src == dst || std::holds_alternative<ClientId>(from) ||
        std::holds_alternative<ClientId>(to)) {
      delay = sc_.intra_delay;
    } else {
      Tick lo = sc_.inter_delay_min, hi = sc_.inter_delay_max;
      auto ov = sc_.delay_overrides.find({src, dst});
      if (ov != sc_.delay_overrides.end()) {
        lo = ov->second.first;
        hi = ov->second.second;
      }
      if (sc_.gst > 0 && now_ >= sc_.gst) hi = lo;
      delay = lo + (hi > lo ? static_cast<Tick>(rng_() % (hi - lo + 1)) : 0);
    }
    auto key = std::make_pair(from, to);
    Tick at = std::max(now_ + delay, fifo_last_[key]);
    fifo_last_[key] = at;
    enqueue(at, EvDelivery{from, to, std::move(m)});
  }

  void process(EvDelivery& d) {
    // The network outlives a DC, but undelivered messages from a crashed DC
    // are gone with it, and nothing is delivered to dead replicas.
    if (std::holds_alternative<ReplicaId>(d.from) &&
        !dc_alive(std::get<ReplicaId>(d.from).dc))
      return;
    if (std::holds_alternative<ReplicaId>(d.to)) {
      ReplicaId to = std::get<ReplicaId>(d.to);
      if (!dc_alive(to.dc)) return;
      Replica& r = *replicas_.at(to);
      if (std::holds_alternative<ReplicaId>(d.from))
        r.on_message(std::get<ReplicaId>(d.from), d.msg);
      else
        r.on_client_message(std::get<ClientId>(d.from), d.msg);
      invariants_->after_event(r, now_);
    } else {
      clients_.at(std::get<ClientId>(d.to))->on_reply(d.msg);
    }
  }

  void process(EvTimer& t) {
    if (!dc_alive(t.replica.dc)) return;  // crashed replicas stop for good
    Replica& r = *replicas_.at(t.replica);
    r.on_timer(t.kind);
    invariants_->after_event(r, now_);
    schedule_timer(t.replica, t.kind, now_ + period(t.kind) + jitter());
  }

  void process(EvCrash& c) {
    if (crashed_.count(c.dc)) return;
    ReplicaId old_leader = omega(1);
    crashed_[c.dc] = now_;
    trace(Json{{"type", "crash"}, {"dc", c.dc}});
    for (auto& [cid, cl] : clients_)
      if (cl->in_flight() && cl->pending_target().dc == c.dc) cl->mark_blocked();
    if (old_leader.dc == c.dc) {
      ReplicaId fresh = omega(1);
      for (PartitionId m = 1; m <= sc_.num_partitions; ++m)
        for (DcId d = 1; d <= sc_.num_dcs; ++d)
          if (dc_alive(d))
            enqueue(now_ + 1, EvDelivery{Address{ReplicaId{d, m}},
                                         Address{ReplicaId{d, m}},
                                         OmegaChange{m, ReplicaId{fresh.dc, m}}});
    }
  }

  void process(EvSnapshot&) {
    Json reps = Json::array();
    for (const auto& [id, r] : replicas_)
      reps.push_back(Json{{"replica", id.str()},
                          {"clock", r->clock()},
                          {"known", to_json(r->known_vec())},
                          {"stable", to_json(r->stable_vec())},
                          {"uniform", to_json(r->uniform_vec())}});
    trace(Json{{"type", "snapshot"}, {"replicas", reps}});
    if (now_ + 50 <= sc_.max_ticks) enqueue(now_ + 50, EvSnapshot{});
  }

  Tick period(TimerKind k) const {
    switch (k) {
      case TimerKind::Propagate: return sc_.propagate_period;
      case TimerKind::Broadcast: return sc_.broadcast_period;
      case TimerKind::StrongHeartbeat: return sc_.strong_hb_period;
      default: return sc_.retry_period;
    }
  }

  Tick jitter() {
    return sc_.timer_jitter > 0 ? static_cast<Tick>(rng_() % (sc_.timer_jitter + 1))
                                : 0;
  }

  void schedule_timer(ReplicaId r, TimerKind k, Tick at) {
    enqueue(at, EvTimer{r, k});
  }

  void check_crash_triggers() {
    for (size_t i = 0; i < sc_.crashes.size(); ++i) {
      if (crash_scheduled_[i]) continue;
      const CrashEvent& c = sc_.crashes[i];
      if (auto* wp = std::get_if<CrashWhenPrepared>(&c.trigger)) {
        bool hit = false;
        for (const auto& [id, r] : replicas_) {
          if (id.partition != wp->partition) continue;
          if (wp->remote_only && id.dc == c.dc) continue;
          if (!r->tcs_prepared().empty()) hit = true;
        }
        if (hit) {
          enqueue(now_ + wp->delta, EvCrash{c.dc});
          crash_scheduled_[i] = true;
        }
      } else if (auto* ac = std::get_if<CrashAfterClientOp>(&c.trigger)) {
        auto it = clients_.find(ac->client);
        if (it != clients_.end() && it->second->completed_ops() >= ac->op_index + 1) {
          enqueue(now_ + ac->delta, EvCrash{c.dc});
          crash_scheduled_[i] = true;
        }
      }
    }
  }

  bool all_clients_terminal() const {
    for (const auto& [cid, c] : clients_)
      if (!c->terminal()) return false;
    return true;
  }

  /// A committed update transaction is owed eventual visibility when it is
  /// strong, originates at a correct DC, or was observed by a uniform
  /// barrier. The run can stop once every owed transaction is stored at all
  /// correct DCs and covered by their exposure frontiers.
  bool obligations_met() const {
    for (const auto& [tid, info] : invariants_->committed()) {
      bool has_writes = false;
      for (const auto& [m, w] : info.writes) has_writes |= !w.empty();
      if (!has_writes) continue;
      if (!obligated(info)) continue;
      for (DcId d = 1; d <= sc_.num_dcs; ++d) {
        if (!dc_alive(d)) continue;
        for (const auto& [m, w] : info.writes) {
          if (w.empty()) continue;
          if (!invariants_->applied(ReplicaId{d, m}).count(tid)) return false;
        }
        VectorTimestamp frontier = dc_frontier(d);
        if (!vec_leq_dc(info.commit_vec, frontier) ||
            info.commit_vec.strong() > frontier.strong())
          return false;
      }
    }
    return true;
  }

  bool obligated(const CommittedInfo& info) const {
    if (info.strong || dc_alive(info.origin)) return true;
    for (const auto& b : barriers_)
      if (vec_leq(info.commit_vec, b.first) && info.lamport < b.second) return true;
    return false;
  }

  void finding(Json f) {
    f["t"] = now_;
    result_.findings.push_back(f);
    result_.trace.add(std::move(f));
  }

  void finish() {
    result_.end_tick = now_;
    for (DcId d = 1; d <= sc_.num_dcs; ++d)
      if (dc_alive(d)) result_.correct_dcs.insert(d);

    if (result_.hit_max_ticks) {
      for (const auto& [cid, c] : clients_) {
        if (c->done()) continue;
        if (c->blocked()) continue;  // lost with its DC; expected under crashes
        finding(Json{{"type", "liveness"},
                     {"what", "client_incomplete"},
                     {"client", cid}});
      }
      if (all_clients_terminal() && !obligations_met())
        finding(Json{{"type", "liveness"}, {"what", "obligations_unmet"}});
      for (const auto& [tid, info] : invariants_->committed()) {
        if (!obligated(info)) continue;
        for (DcId d : result_.correct_dcs)
          for (const auto& [m, w] : info.writes) {
            if (w.empty()) continue;
            if (!invariants_->applied(ReplicaId{d, m}).count(tid)) {
              finding(Json{{"type", "liveness"},
                           {"what", "tx_not_replicated"},
                           {"tid", tid.str()},
                           {"dc", d}});
            }
          }
      }
    }
    invariants_->end_of_run(result_.correct_dcs);

    Json reps = Json::array();
    for (const auto& [id, r] : replicas_) {
      Json applied = Json::array();
      for (const TxId& tid : invariants_->applied(id)) applied.push_back(to_json(tid));
      reps.push_back(Json{{"dc", id.dc},
                          {"partition", id.partition},
                          {"applied", applied},
                          {"known", to_json(r->known_vec())},
                          {"stable", to_json(r->stable_vec())},
                          {"uniform", to_json(r->uniform_vec())},
                          {"last_delivered", r->tcs_last_delivered()}});
    }
    Json correct = Json::array();
    for (DcId d : result_.correct_dcs) correct.push_back(d);
    Json clients = Json::array();
    for (const auto& [cid, c] : clients_)
      clients.push_back(Json{{"client", cid},
                             {"done", c->done()},
                             {"blocked", c->blocked()}});
    trace(Json{{"type", "end_state"},
               {"tick", now_},
               {"correct_dcs", correct},
               {"clients", clients},
               {"replicas", reps}});
  }

  Scenario sc_;
  std::mt19937_64 rng_;
  Tick now_ = 0;
  int64_t seq_ = 0;
  int64_t rid_seq_ = 0;

  std::map<ReplicaId, std::unique_ptr<Replica>> replicas_;
  std::map<ClientId, std::unique_ptr<Client>> clients_;
  std::unique_ptr<Invariants> invariants_;

  std::priority_queue<SimEvent, std::vector<SimEvent>, std::greater<SimEvent>> queue_;
  std::map<std::pair<Address, Address>, Tick> fifo_last_;
  std::map<DcId, Tick> crashed_;
  std::vector<bool> crash_scheduled_;
  std::vector<std::pair<VectorTimestamp, LamportStamp>> barriers_;

  RunResult result_;
};

/// Convenience wrapper: run a scenario and return its result.
inline RunResult run_scenario(const Scenario& sc) {
  Simulation sim(sc);
  return sim.run();
}

}  // namespace unistore

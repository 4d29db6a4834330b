// Copyright 2026 the unistore-sim authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file or http://www.apache.org/licenses/LICENSE-2.0
#pragma once

#include <map>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "unistore/core.hpp"
#include "unistore/trace.hpp"

namespace unistore {

// --- client scripts ---

/// One read or write inside a transaction, executed in order.
struct TxAction {
  bool is_read = false;
  Key key = 0;
  Value value = 0;  // ignored for reads
};

struct OpTx {
  bool strong = false;
  std::vector<TxAction> actions;
  // For strong transactions: re-execute on abort, up to this many times.
  // -1 retries until the run ends.
  int max_retries = 0;
  std::optional<PartitionId> coord;  // pin the coordinator partition
};
struct OpBarrier {};
struct OpAttach { DcId dc = 0; };
struct OpWaitTick { Tick tick = 0; };
/// Harness-level wait: proceed once a fresh transaction at the client's DC
/// would observe `value` under key `key`.
struct OpAwaitVisible { Key key = 0; Value value = 0; };
/// Harness-level wait: proceed once `dc` has crashed, plus `delta` ticks.
struct OpAwaitCrash { DcId dc = 0; Tick delta = 0; };

using ClientOp =
    std::variant<OpTx, OpBarrier, OpAttach, OpWaitTick, OpAwaitVisible, OpAwaitCrash>;

struct ClientScript {
  ClientId id = 0;
  DcId dc = 0;  // initial attachment
  std::vector<ClientOp> ops;
};

// --- crash schedule ---

struct CrashAtTick { Tick at = 0; };
/// Crash when some replica of `partition` (outside the crashing DC if
/// remote_only) holds a prepared strong entry; fires `delta` ticks later.
struct CrashWhenPrepared { PartitionId partition = 1; bool remote_only = false; Tick delta = 0; };
/// Crash `delta` ticks after client `client` completes its op at `op_index`.
struct CrashAfterClientOp { ClientId client = 0; int op_index = 0; Tick delta = 0; };

using CrashTrigger = std::variant<CrashAtTick, CrashWhenPrepared, CrashAfterClientOp>;

struct CrashEvent {
  DcId dc = 0;
  CrashTrigger trigger;
};

// --- scenario ---

struct Scenario {
  std::string name = "scenario";
  int num_dcs = 3;
  int num_partitions = 2;
  int f = 1;
  uint64_t seed = 1;
  Tick max_ticks = 3000;

  // Timer periods, in ticks.
  Tick propagate_period = 5;
  Tick broadcast_period = 5;
  Tick strong_hb_period = 10;
  Tick retry_period = 20;
  Tick timer_jitter = 1;  // uniform extra delay in [0, jitter]

  // Message delays, in ticks. Inter-DC delays collapse to the minimum
  // after gst (eventual synchrony); gst = 0 means synchronous from the start.
  Tick intra_delay = 1;
  Tick inter_delay_min = 2;
  Tick inter_delay_max = 2;
  Tick gst = 0;
  // Per (src,dst) DC pair overrides of [min,max] inter-DC delay.
  std::map<std::pair<DcId, DcId>, std::pair<Tick, Tick>> delay_overrides;

  // Ablations and protocol mutations.
  bool disable_forwarding = false;
  bool skip_strong_uniform_barrier = false;
  bool expose_remote_before_uniform = false;
  bool mutate_skip_cert_check = false;
  bool mutate_drop_lamport_merge = false;

  bool trace_protocol = true;   // record replicate/heartbeat/stability events
  bool check_invariants = true; // omniscient per-event property assertions

  std::vector<CrashEvent> crashes;
  std::vector<ClientScript> clients;

  void validate() const {
    if (num_dcs < 1 || num_partitions < 1)
      throw std::invalid_argument("scenario: need at least one DC and partition");
    if (2 * f >= num_dcs)
      throw std::invalid_argument("scenario: f must satisfy f < D/2");
    if (num_dcs != 2 * f + 1)
      throw std::invalid_argument("scenario: the model assumes D = 2f+1");
    if (inter_delay_min < 1 || intra_delay < 1)
      throw std::invalid_argument("scenario: delays must be >= 1 tick");
    for (const auto& c : clients)
      if (c.dc < 1 || c.dc > num_dcs)
        throw std::invalid_argument("scenario: client attached to unknown DC");
  }
};

// --- JSON (scenario files) ---

inline Json to_json(const ClientOp& op) {
  return std::visit(
      [](const auto& o) -> Json {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, OpTx>) {
          Json acts = Json::array();
          for (const auto& a : o.actions) {
            if (a.is_read)
              acts.push_back(Json{{"r", a.key}});
            else
              acts.push_back(Json{{"w", Json::array({a.key, a.value})}});
          }
          Json j{{"op", "tx"},
                 {"kind", o.strong ? "strong" : "causal"},
                 {"actions", acts}};
          if (o.strong) j["max_retries"] = o.max_retries;
          if (o.coord) j["coord"] = *o.coord;
          return j;
        } else if constexpr (std::is_same_v<T, OpBarrier>) {
          return Json{{"op", "barrier"}};
        } else if constexpr (std::is_same_v<T, OpAttach>) {
          return Json{{"op", "attach"}, {"dc", o.dc}};
        } else if constexpr (std::is_same_v<T, OpWaitTick>) {
          return Json{{"op", "wait_tick"}, {"tick", o.tick}};
        } else if constexpr (std::is_same_v<T, OpAwaitVisible>) {
          return Json{{"op", "await_visible"}, {"key", o.key}, {"value", o.value}};
        } else {
          return Json{{"op", "await_crash"}, {"dc", o.dc}, {"delta", o.delta}};
        }
      },
      op);
}

inline ClientOp client_op_from_json(const Json& j) {
  const std::string op = j.at("op");
  if (op == "tx") {
    OpTx t;
    t.strong = j.at("kind") == "strong";
    for (const auto& a : j.at("actions")) {
      if (a.contains("r"))
        t.actions.push_back({true, a.at("r").get<Key>(), 0});
      else
        t.actions.push_back(
            {false, a.at("w")[0].get<Key>(), a.at("w")[1].get<Value>()});
    }
    if (j.contains("max_retries")) t.max_retries = j.at("max_retries");
    if (j.contains("coord")) t.coord = j.at("coord").get<PartitionId>();
    return t;
  }
  if (op == "barrier") return OpBarrier{};
  if (op == "attach") return OpAttach{j.at("dc").get<DcId>()};
  if (op == "wait_tick") return OpWaitTick{j.at("tick").get<Tick>()};
  if (op == "await_visible")
    return OpAwaitVisible{j.at("key").get<Key>(), j.at("value").get<Value>()};
  if (op == "await_crash")
    return OpAwaitCrash{j.at("dc").get<DcId>(), j.at("delta").get<Tick>()};
  throw std::invalid_argument("unknown client op: " + op);
}

inline Json to_json(const CrashEvent& c) {
  Json j{{"dc", c.dc}};
  std::visit(
      [&](const auto& t) {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, CrashAtTick>) {
          j["at"] = t.at;
        } else if constexpr (std::is_same_v<T, CrashWhenPrepared>) {
          j["when_prepared"] = Json{{"partition", t.partition},
                                    {"remote_only", t.remote_only},
                                    {"delta", t.delta}};
        } else {
          j["after_client_op"] = Json{
              {"client", t.client}, {"op_index", t.op_index}, {"delta", t.delta}};
        }
      },
      c.trigger);
  return j;
}

inline CrashEvent crash_from_json(const Json& j) {
  CrashEvent c;
  c.dc = j.at("dc").get<DcId>();
  if (j.contains("at")) {
    c.trigger = CrashAtTick{j.at("at").get<Tick>()};
  } else if (j.contains("when_prepared")) {
    const auto& w = j.at("when_prepared");
    c.trigger = CrashWhenPrepared{w.at("partition").get<PartitionId>(),
                                  w.at("remote_only").get<bool>(),
                                  w.at("delta").get<Tick>()};
  } else {
    const auto& w = j.at("after_client_op");
    c.trigger = CrashAfterClientOp{w.at("client").get<ClientId>(),
                                   w.at("op_index").get<int>(),
                                   w.at("delta").get<Tick>()};
  }
  return c;
}

inline Json to_json(const Scenario& s) {
  Json j;
  j["name"] = s.name;
  j["D"] = s.num_dcs;
  j["N"] = s.num_partitions;
  j["f"] = s.f;
  j["seed"] = s.seed;
  j["max_ticks"] = s.max_ticks;
  j["periods"] = Json{{"propagate", s.propagate_period},
                      {"broadcast", s.broadcast_period},
                      {"strong_hb", s.strong_hb_period},
                      {"retry", s.retry_period},
                      {"jitter", s.timer_jitter}};
  j["delays"] = Json{{"intra", s.intra_delay},
                     {"inter_min", s.inter_delay_min},
                     {"inter_max", s.inter_delay_max},
                     {"gst", s.gst}};
  if (!s.delay_overrides.empty()) {
    Json ov = Json::array();
    for (const auto& [pair, mm] : s.delay_overrides)
      ov.push_back(Json{{"src", pair.first},
                        {"dst", pair.second},
                        {"min", mm.first},
                        {"max", mm.second}});
    j["delays"]["overrides"] = ov;
  }
  Json flags = Json::object();
  flags["disable_forwarding"] = s.disable_forwarding;
  flags["skip_strong_uniform_barrier"] = s.skip_strong_uniform_barrier;
  flags["expose_remote_before_uniform"] = s.expose_remote_before_uniform;
  flags["mutate_skip_cert_check"] = s.mutate_skip_cert_check;
  flags["mutate_drop_lamport_merge"] = s.mutate_drop_lamport_merge;
  j["flags"] = flags;
  j["trace_protocol"] = s.trace_protocol;
  j["check_invariants"] = s.check_invariants;
  Json crashes = Json::array();
  for (const auto& c : s.crashes) crashes.push_back(to_json(c));
  j["crashes"] = crashes;
  Json clients = Json::array();
  for (const auto& c : s.clients) {
    Json ops = Json::array();
    for (const auto& op : c.ops) ops.push_back(to_json(op));
    clients.push_back(Json{{"id", c.id}, {"dc", c.dc}, {"ops", ops}});
  }
  j["clients"] = clients;
  return j;
}

inline Scenario scenario_from_json(const Json& j) {
  Scenario s;
  s.name = j.value("name", "scenario");
  s.num_dcs = j.at("D").get<int>();
  s.num_partitions = j.at("N").get<int>();
  s.f = j.at("f").get<int>();
  s.seed = j.value("seed", uint64_t{1});
  s.max_ticks = j.value("max_ticks", Tick{3000});
  if (j.contains("periods")) {
    const auto& p = j.at("periods");
    s.propagate_period = p.value("propagate", s.propagate_period);
    s.broadcast_period = p.value("broadcast", s.broadcast_period);
    s.strong_hb_period = p.value("strong_hb", s.strong_hb_period);
    s.retry_period = p.value("retry", s.retry_period);
    s.timer_jitter = p.value("jitter", s.timer_jitter);
  }
  if (j.contains("delays")) {
    const auto& d = j.at("delays");
    s.intra_delay = d.value("intra", s.intra_delay);
    s.inter_delay_min = d.value("inter_min", s.inter_delay_min);
    s.inter_delay_max = d.value("inter_max", s.inter_delay_max);
    s.gst = d.value("gst", s.gst);
    if (d.contains("overrides"))
      for (const auto& o : d.at("overrides"))
        s.delay_overrides[{o.at("src").get<DcId>(), o.at("dst").get<DcId>()}] = {
            o.at("min").get<Tick>(), o.at("max").get<Tick>()};
  }
  if (j.contains("flags")) {
    const auto& fl = j.at("flags");
    s.disable_forwarding = fl.value("disable_forwarding", false);
    s.skip_strong_uniform_barrier = fl.value("skip_strong_uniform_barrier", false);
    s.expose_remote_before_uniform = fl.value("expose_remote_before_uniform", false);
    s.mutate_skip_cert_check = fl.value("mutate_skip_cert_check", false);
    s.mutate_drop_lamport_merge = fl.value("mutate_drop_lamport_merge", false);
  }
  s.trace_protocol = j.value("trace_protocol", true);
  s.check_invariants = j.value("check_invariants", true);
  if (j.contains("crashes"))
    for (const auto& c : j.at("crashes")) s.crashes.push_back(crash_from_json(c));
  if (j.contains("clients"))
    for (const auto& c : j.at("clients")) {
      ClientScript cs;
      cs.id = c.at("id").get<ClientId>();
      cs.dc = c.at("dc").get<DcId>();
      for (const auto& op : c.at("ops")) cs.ops.push_back(client_op_from_json(op));
      s.clients.push_back(std::move(cs));
    }
  s.validate();
  return s;
}

// --- built-in scenarios ---

/// Forwarding demo: t1 commits at d1 and reaches d2 only before d1 crashes;
/// t2 at d2 depends on t1. With forwarding, d2 spreads t1 so both end up
/// everywhere; without it, t2 can never be exposed at d3.
inline Scenario scenario_fig1() {
  Scenario s;
  s.name = "fig1";
  s.num_dcs = 3;
  s.num_partitions = 2;
  s.f = 1;
  s.max_ticks = 600;
  s.timer_jitter = 0;
  s.delay_overrides[{1, 3}] = {60, 60};  // d1 -> d3 is slow
  s.crashes.push_back({1, CrashAtTick{25}});
  ClientScript c1{1, 1, {}};
  c1.ops.push_back(OpTx{false, {{false, 1, 10}}, 0, 1});  // t1: x <- 10
  ClientScript c2{2, 2, {}};
  c2.ops.push_back(OpAwaitVisible{1, 10});
  c2.ops.push_back(OpTx{false, {{true, 1, 0}, {false, 2, 20}}, 0, 1});  // t2
  s.clients = {c1, c2};
  return s;
}

/// Uniformity demo: strong t2 at d1 depends on causal t1. With the uniform
/// barrier, t2 only commits once t1 is at f+1 DCs, so after d1 crashes a
/// conflicting strong t3 at d3 eventually observes t2 and commits. Skipping
/// the barrier strands t2 behind the lost t1 and t3 aborts forever.
inline Scenario scenario_fig2() {
  Scenario s;
  s.name = "fig2";
  s.num_dcs = 3;
  s.num_partitions = 1;
  s.f = 1;
  s.max_ticks = 900;
  s.propagate_period = 30;  // widen the non-uniform window
  s.timer_jitter = 0;
  s.crashes.push_back({1, CrashAfterClientOp{1, 1, 3}});
  ClientScript c1{1, 1, {}};
  c1.ops.push_back(OpTx{false, {{false, 1, 10}}, 0, 1});               // t1: x <- 10
  c1.ops.push_back(OpTx{true, {{true, 1, 0}, {false, 2, 20}}, 0, 1});  // t2: strong
  ClientScript c3{3, 3, {}};
  c3.ops.push_back(OpAwaitCrash{1, 10});
  c3.ops.push_back(OpTx{true, {{true, 2, 0}, {false, 2, 30}}, -1, 1});  // t3: strong
  s.clients = {c1, c3};
  return s;
}

/// Migration: client writes at d1, runs a uniform barrier, then attaches to
/// d2 while d1 crashes right after the barrier. The next read at d2 must
/// observe the client's earlier write.
inline Scenario scenario_migration() {
  Scenario s;
  s.name = "migration";
  s.num_dcs = 3;
  s.num_partitions = 2;
  s.f = 1;
  s.max_ticks = 700;
  s.crashes.push_back({1, CrashAfterClientOp{1, 1, 1}});
  ClientScript c1{1, 1, {}};
  c1.ops.push_back(OpTx{false, {{false, 1, 77}}, 0, 1});  // x <- 77 at d1
  c1.ops.push_back(OpBarrier{});
  c1.ops.push_back(OpAttach{2});
  c1.ops.push_back(OpTx{false, {{true, 1, 0}}, 0, 1});  // read x at d2
  s.clients = {c1};
  return s;
}

/// Paxos-leader failure with an in-flight strong transaction whose prepared
/// entry reached a remote quorum; the new leader re-certifies it during
/// recovery.
inline Scenario scenario_recovery() {
  Scenario s;
  s.name = "recovery";
  s.num_dcs = 3;
  s.num_partitions = 1;
  s.f = 1;
  s.max_ticks = 900;
  s.timer_jitter = 0;
  s.crashes.push_back({1, CrashWhenPrepared{1, true, 0}});
  ClientScript c2{2, 2, {}};
  c2.ops.push_back(OpTx{true, {{false, 1, 11}}, -1, 1});  // z <- 11, strong
  c2.ops.push_back(OpTx{true, {{false, 1, 12}}, -1, 1});  // z <- 12, strong
  s.clients = {c2};
  return s;
}

/// Leader failure where the in-flight strong transaction spans two
/// partitions and only one partition's quorum learned it: recovery parks it
/// in doNotWaitFor and the coordinator's retry re-drives it to a decision.
inline Scenario scenario_recovery_unknown() {
  Scenario s;
  s.name = "recovery_unknown";
  s.num_dcs = 3;
  s.num_partitions = 2;
  s.f = 1;
  s.max_ticks = 900;
  s.timer_jitter = 0;
  s.inter_delay_min = 2;
  s.inter_delay_max = 8;
  s.seed = 5;
  s.crashes.push_back({1, CrashWhenPrepared{1, true, 0}});
  ClientScript c2{2, 2, {}};
  // keys 1 and 2 land on partitions 2 and 1 respectively (k mod N + 1)
  c2.ops.push_back(OpTx{true, {{false, 2, 21}, {false, 1, 22}}, -1, 1});
  c2.ops.push_back(OpTx{true, {{false, 2, 23}}, -1, 1});
  s.clients = {c2};
  return s;
}

inline std::optional<Scenario> builtin_scenario(const std::string& name) {
  if (name == "fig1") return scenario_fig1();
  if (name == "fig2") return scenario_fig2();
  if (name == "migration") return scenario_migration();
  if (name == "recovery") return scenario_recovery();
  if (name == "recovery_unknown") return scenario_recovery_unknown();
  return std::nullopt;
}

/// Random scenario for the fuzz suite: D=3, f=1, N=2, three clients with up
/// to `max_ops` ops each, at most one crash.
inline Scenario fuzz_scenario(uint64_t seed, int max_ops = 40) {
  std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ull + 0xD1B54A32D192ED03ull);
  auto pick = [&](int lo, int hi) {
    return lo + static_cast<int>(rng() % static_cast<uint64_t>(hi - lo + 1));
  };
  Scenario s;
  s.name = "fuzz-" + std::to_string(seed);
  s.num_dcs = 3;
  s.num_partitions = 2;
  s.f = 1;
  s.seed = seed;
  s.max_ticks = 4000;
  s.inter_delay_min = 1;
  s.inter_delay_max = static_cast<Tick>(pick(2, 6));
  s.trace_protocol = false;

  if (pick(0, 1) == 1)
    s.crashes.push_back({static_cast<DcId>(pick(1, 3)),
                         CrashAtTick{static_cast<Tick>(pick(40, 400))}});

  for (ClientId cid = 1; cid <= 3; ++cid) {
    Value next_val = cid * 100000 + 1;  // written values identify their writer
    ClientScript cs{cid, static_cast<DcId>((cid - 1) % 3 + 1), {}};
    int ops_budget = pick(max_ops / 2, max_ops);
    int made = 0;
    while (made < ops_budget) {
      int roll = pick(0, 99);
      if (roll < 5) {
        cs.ops.push_back(OpBarrier{});
        made += 1;
      } else if (roll < 8) {
        cs.ops.push_back(OpAttach{static_cast<DcId>(pick(1, 3))});
        made += 1;
      } else {
        OpTx tx;
        tx.strong = roll >= 75;
        tx.max_retries = tx.strong ? 2 : 0;
        int n_actions = pick(1, 4);
        for (int a = 0; a < n_actions; ++a) {
          bool rd = pick(0, 1) == 1;
          Key k = static_cast<Key>(pick(0, 7));
          if (rd)
            tx.actions.push_back({true, k, 0});
          else
            tx.actions.push_back({false, k, next_val++});
        }
        cs.ops.push_back(tx);
        made += n_actions + 1;
      }
    }
    s.clients.push_back(std::move(cs));
  }
  return s;
}

}  // namespace unistore

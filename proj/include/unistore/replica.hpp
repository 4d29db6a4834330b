// Copyright 2026 the unistore-sim authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file or http://www.apache.org/licenses/LICENSE-2.0
#pragma once

#include <algorithm>
#include <cassert>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "unistore/core.hpp"
#include "unistore/messages.hpp"
#include "unistore/scenario.hpp"
#include "unistore/trace.hpp"

namespace unistore {

struct LogEntry {
  Value value = 0;
  VectorTimestamp commit_vec;
  LamportStamp lamport;
  TxId tid;  // simulator metadata, not protocol state
};

struct PreparedCausal {
  PartitionWrites writes;
  int64_t ts = 0;
};

enum class TimerKind { Propagate, Broadcast, StrongHeartbeat, TcsRetry };

enum class TcsStatus { Leader, Follower, Recovering, Restoring };

inline const char* tcs_status_str(TcsStatus s) {
  switch (s) {
    case TcsStatus::Leader: return "leader";
    case TcsStatus::Follower: return "follower";
    case TcsStatus::Recovering: return "recovering";
    default: return "restoring";
  }
}

/// What a replica mutated while handling one event; the harness reads and
/// clears this after each event to drive targeted invariant checks.
struct DirtyState {
  std::set<DcId> known_entries;
  bool known_strong = false;
  bool stable = false;
  std::set<DcId> uniform_entries;
  std::vector<std::pair<Key, TxId>> appended;
  bool touched = false;

  void clear() { *this = DirtyState{}; }
};

/// Environment a replica runs in; implemented by the simulation.
class SimEnv {
 public:
  virtual ~SimEnv() = default;
  virtual Tick now() const = 0;
  virtual const Scenario& config() const = 0;
  virtual void send(ReplicaId from, ReplicaId to, Message m) = 0;
  virtual void send_client(ReplicaId from, ClientId to, Message m) = 0;
  virtual ReplicaId omega(PartitionId m) const = 0;
  virtual bool dc_alive(DcId d) const = 0;
  /// Crashed data centers, as reported by the (perfect) failure suspicion module.
  virtual std::vector<DcId> suspected() const = 0;
  virtual void trace(Json e) = 0;
  virtual void tcs_action(Json e) = 0;
  virtual void note_causal_committed(const TxId& tid, const VectorTimestamp& cv,
                                     const LamportStamp& lc,
                                     const WriteBuffer& writes, DcId origin) = 0;
  virtual void note_strong_committed(const TxId& tid, const VectorTimestamp& cv,
                                     const LamportStamp& lc,
                                     const WriteBuffer& writes,
                                     const VectorTimestamp& snap,
                                     const ReadSet& rset, DcId origin) = 0;
  virtual void note_violation(const std::string& check, Json detail) = 0;
  virtual int64_t fresh_rid() = 0;
};

class Replica {
 public:
  Replica(SimEnv& env, ReplicaId id)
      : env_(env),
        id_(id),
        num_dcs_(env.config().num_dcs),
        num_partitions_(env.config().num_partitions),
        f_(env.config().f),
        known_vec_(num_dcs_),
        stable_vec_(num_dcs_),
        uniform_vec_(num_dcs_) {
    for (PartitionId n = 1; n <= num_partitions_; ++n)
      local_matrix_[n] = VectorTimestamp(num_dcs_);
    for (DcId i = 1; i <= num_dcs_; ++i) {
      stable_matrix_[i] = VectorTimestamp(num_dcs_);
      global_matrix_[i] = VectorTimestamp(num_dcs_);
    }
    // Groups of f+1 data centers containing this one, for the uniformVec
    // computation.
    std::vector<DcId> others;
    for (DcId i = 1; i <= num_dcs_; ++i)
      if (i != id_.dc) others.push_back(i);
    std::vector<int> mask(others.size(), 0);
    std::fill(mask.begin(), mask.begin() + f_, 1);
    std::sort(mask.begin(), mask.end());
    do {
      std::vector<DcId> g{id_.dc};
      for (size_t i = 0; i < others.size(); ++i)
        if (mask[i]) g.push_back(others[i]);
      groups_.push_back(g);
    } while (std::next_permutation(mask.begin(), mask.end()));

    tcs_trusted_ = {1, id_.partition};
    tcs_status_ = id_.dc == 1 ? TcsStatus::Leader : TcsStatus::Follower;
  }

  // --- event entry points, called by the simulation ---

  void on_message(ReplicaId from, const Message& m) {
    advance_clock();
    std::visit([&](const auto& msg) { handle(from, msg); }, m);
    post_event();
  }

  void on_client_message(ClientId from, const Message& m) {
    advance_clock();
    std::visit([&](const auto& msg) { handle_client(from, msg); }, m);
    post_event();
  }

  void on_timer(TimerKind k) {
    advance_clock();
    switch (k) {
      case TimerKind::Propagate: propagate_local_txs(); break;
      case TimerKind::Broadcast: broadcast_vecs(); break;
      case TimerKind::StrongHeartbeat: heartbeat_strong(); break;
      case TimerKind::TcsRetry: tcs_retry(); break;
    }
    post_event();
  }

  // --- state, exposed for tests and omniscient invariant checks ---

  ReplicaId id() const { return id_; }
  int64_t clock() const { return clock_; }
  const VectorTimestamp& known_vec() const { return known_vec_; }
  const VectorTimestamp& stable_vec() const { return stable_vec_; }
  const VectorTimestamp& uniform_vec() const { return uniform_vec_; }
  const std::map<Key, std::vector<LogEntry>>& op_log() const { return op_log_; }
  const std::map<TxId, PreparedCausal>& prepared_causal() const {
    return prepared_causal_;
  }
  const std::map<DcId, std::vector<CausalTxRecord>>& committed_causal() const {
    return committed_causal_;
  }
  const std::map<TxId, StrongPrepared>& tcs_prepared() const { return tcs_prepared_; }
  const std::map<TxId, StrongDecided>& tcs_decided() const { return tcs_decided_; }
  TcsStatus tcs_status() const { return tcs_status_; }
  int64_t tcs_ballot() const { return tcs_ballot_; }
  int64_t tcs_last_delivered() const { return tcs_last_delivered_; }
  const std::set<TxId>& tcs_do_not_wait_for() const { return tcs_do_not_wait_for_; }
  DirtyState& dirty() { return dirty_; }

  /// Snapshot a fresh transaction with empty causal past would execute on.
  VectorTimestamp exposure_frontier() const {
    VectorTimestamp v = uniform_vec_;
    v.set_strong(stable_vec_.strong());
    return v;
  }

  // Direct access for unit tests.
  void test_handle(ReplicaId from, const Message& m) { on_message(from, m); }
  void test_set_clock(int64_t c) { clock_ = c; }
  void test_set_stable(const VectorTimestamp& v) { stable_vec_ = v; }
  void test_set_uniform(const VectorTimestamp& v) { uniform_vec_ = v; }
  void test_add_prepared_causal(const TxId& tid, PartitionWrites w, int64_t ts) {
    prepared_causal_[tid] = {std::move(w), ts};
  }
  void test_add_committed_causal(DcId origin, CausalTxRecord tx) {
    committed_causal_[origin].push_back(std::move(tx));
  }
  void test_append_log(Key k, Value v, const VectorTimestamp& cv,
                       const LamportStamp& lc, const TxId& tid) {
    append_log(k, v, cv, lc, tid);
  }
  std::pair<Value, LamportStamp> test_snapshot_read(Key k,
                                                    const VectorTimestamp& snap) {
    return snapshot_read(k, snap);
  }
  std::pair<Vote, LamportStamp> test_certification_check(
      const PartitionWrites& w, const ReadSet& rset, const VectorTimestamp& snap,
      LamportStamp lc) {
    return certification_check(w, rset, snap, lc);
  }
  void test_add_tcs_prepared(StrongPrepared e) {
    tcs_prepared_at_[e.tid] = 0;
    tcs_prepared_[e.tid] = std::move(e);
  }
  void test_add_tcs_decided(StrongDecided e) { tcs_decided_[e.tid] = std::move(e); }
  void test_fire_timer(TimerKind k) { on_timer(k); }
  const std::map<PartitionId, VectorTimestamp>& test_local_matrix() const {
    return local_matrix_;
  }

 private:
  // ==========================================================================
  // clock and deferred waits
  // ==========================================================================

  void advance_clock() { clock_ = std::max(clock_ + 1, env_.now()); }

  struct Wait {
    std::function<bool()> guard;
    std::function<void()> fire;
  };

  void defer_until(std::function<bool()> guard, std::function<void()> fire) {
    if (guard()) {
      fire();
    } else {
      waits_.push_back({std::move(guard), std::move(fire)});
    }
  }

  /// Re-evaluates deferred waits and standing rules until a fixpoint.
  /// Handlers are atomic, so this runs strictly between events.
  void post_event() {
    bool fired = true;
    while (fired) {
      fired = false;
      for (size_t i = 0; i < waits_.size(); ++i) {
        if (waits_[i].guard()) {
          Wait w = std::move(waits_[i]);
          waits_.erase(waits_.begin() + static_cast<long>(i));
          w.fire();
          fired = true;
          break;
        }
      }
      if (tcs_check_restoring_done()) fired = true;
    }
    tcs_try_deliver();
  }

  // ==========================================================================
  // monotonic vector setters (the harness asserts on regressions)
  // ==========================================================================

  void set_known(DcId i, int64_t v) {
    if (v < known_vec_.at(i))
      env_.note_violation("monotonic_knownVec",
                          Json{{"replica", id_.str()},
                               {"entry", i},
                               {"old", known_vec_.at(i)},
                               {"new", v}});
    if (v != known_vec_.at(i)) {
      known_vec_.set(i, v);
      dirty_.known_entries.insert(i);
      dirty_.touched = true;
    }
  }

  void set_known_strong(int64_t v) {
    if (v < known_vec_.strong())
      env_.note_violation("monotonic_knownVec_strong",
                          Json{{"replica", id_.str()},
                               {"old", known_vec_.strong()},
                               {"new", v}});
    if (v != known_vec_.strong()) {
      known_vec_.set_strong(v);
      dirty_.known_strong = true;
      dirty_.touched = true;
    }
  }

  void merge_uniform(DcId i, int64_t v) {
    if (v > uniform_vec_.at(i)) {
      uniform_vec_.set(i, v);
      dirty_.uniform_entries.insert(i);
      dirty_.touched = true;
    }
  }

  void append_log(Key k, Value v, const VectorTimestamp& cv,
                  const LamportStamp& lc, const TxId& tid) {
    op_log_[k].push_back({v, cv, lc, tid});
    dirty_.appended.emplace_back(k, tid);
    dirty_.touched = true;
  }

  // ==========================================================================
  // causal-engine: transaction coordination (Alg. 2)
  // ==========================================================================

  void handle_client(ClientId client, const StartTxReq& r) {
    for (DcId i = 1; i <= num_dcs_; ++i)
      if (i != id_.dc) merge_uniform(i, r.past.at(i));
    TxId tid{id_.dc, id_.partition, ++tid_seq_};
    VectorTimestamp snap = uniform_vec_;
    snap.set(id_.dc, std::max(r.past.at(id_.dc), uniform_vec_.at(id_.dc)));
    snap.set_strong(std::max(r.past.strong(), stable_vec_.strong()));
    snap_vec_[tid] = snap;
    wbuff_[tid];
    rset_[tid];
    env_.send_client(id_, client, StartTxResp{client, tid, snap});
  }

  template <typename M>
  void handle_client(ClientId, const M&) {}  // replies never reach replicas

  template <typename M>
  void handle(ReplicaId, const M&) {}  // client requests never arrive here

  void handle_client(ClientId client, const DoReadReq& r) {
    PartitionId l = partition_of(r.key, num_partitions_);
    auto& buf = wbuff_[r.tid][l];
    auto it = buf.find(r.key);
    if (it != buf.end()) {
      env_.send_client(id_, client,
                       DoReadResp{client, r.tid, r.key, it->second, std::nullopt});
      return;
    }
    pending_reads_[r.tid] = client;
    env_.send(id_, {id_.dc, l}, GetVersion{id_, r.tid, r.key, snap_vec_[r.tid]});
  }

  void handle(ReplicaId, const Version& v) {
    auto it = pending_reads_.find(v.tid);
    if (it == pending_reads_.end()) return;
    ClientId client = it->second;
    pending_reads_.erase(it);
    rset_[v.tid].insert(v.key);
    env_.send_client(id_, client,
                     DoReadResp{client, v.tid, v.key, v.value, v.lamport});
  }

  void handle_client(ClientId client, const DoUpdateReq& r) {
    PartitionId l = partition_of(r.key, num_partitions_);
    wbuff_[r.tid][l][r.key] = r.value;
    rset_[r.tid].insert(r.key);
    env_.send_client(id_, client, DoUpdateResp{client, r.tid});
  }

  void handle_client(ClientId client, const CommitCausalReq& r) {
    std::set<PartitionId> parts;
    for (const auto& [l, writes] : wbuff_[r.tid])
      if (!writes.empty()) parts.insert(l);
    if (parts.empty()) {
      VectorTimestamp snap = snap_vec_[r.tid];
      cleanup_tx(r.tid);
      env_.send_client(id_, client, CommitCausalResp{client, r.tid, snap, true});
      return;
    }
    auto& s = causal_commits_[r.tid];
    s.client = client;
    s.lamport = r.lc;
    s.commit_vec = snap_vec_[r.tid];
    s.waiting = parts;
    for (PartitionId l : parts)
      env_.send(id_, {id_.dc, l}, Prepare{id_, r.tid, wbuff_[r.tid][l], snap_vec_[r.tid]});
  }

  void handle(ReplicaId from, const PrepareAck& a) {
    auto it = causal_commits_.find(a.tid);
    if (it == causal_commits_.end()) return;
    auto& s = it->second;
    s.commit_vec.set(id_.dc, std::max(s.commit_vec.at(id_.dc), a.ts));
    s.waiting.erase(from.partition);
    if (!s.waiting.empty()) return;
    for (const auto& [l, writes] : wbuff_[a.tid])
      if (!writes.empty())
        env_.send(id_, {id_.dc, l}, CommitMsg{a.tid, s.commit_vec, s.lamport});
    VectorTimestamp cv = s.commit_vec;
    ClientId client = s.client;
    WriteBuffer writes = wbuff_[a.tid];
    LamportStamp lc = s.lamport;
    causal_commits_.erase(a.tid);
    cleanup_tx(a.tid);
    env_.note_causal_committed(a.tid, cv, lc, writes, id_.dc);
    env_.send_client(id_, client, CommitCausalResp{client, a.tid, cv, false});
  }

  void cleanup_tx(const TxId& tid) {
    snap_vec_.erase(tid);
    wbuff_.erase(tid);
    rset_.erase(tid);
  }

  // ==========================================================================
  // causal-engine: transaction execution (Alg. 3)
  // ==========================================================================

  void handle(ReplicaId from, const GetVersion& g) {
    for (DcId i = 1; i <= num_dcs_; ++i)
      if (i != id_.dc) merge_uniform(i, g.snap.at(i));
    defer_until(
        [this, g] {
          return known_vec_.at(id_.dc) >= g.snap.at(id_.dc) &&
                 known_vec_.strong() >= g.snap.strong();
        },
        [this, from, g] {
          auto [v, lc] = snapshot_read(g.key, g.snap);
          env_.send(id_, from, Version{g.tid, g.key, v, lc});
        });
  }

  /// Last update to the key by the transaction with the highest Lamport
  /// stamp among those with commitVec <= snap.
  std::pair<Value, LamportStamp> snapshot_read(Key k,
                                               const VectorTimestamp& snap) const {
    const bool expose_early = env_.config().expose_remote_before_uniform;
    Value best = kInitialValue;
    LamportStamp best_lc{0, 0};
    bool found = false;
    auto it = op_log_.find(k);
    if (it != op_log_.end()) {
      for (const auto& e : it->second) {
        bool in_snap;
        if (expose_early) {
          // Mutation: ignore the remote-DC bounds, exposing remote
          // transactions as soon as they are replicated.
          in_snap = e.commit_vec.at(id_.dc) <= snap.at(id_.dc) &&
                    e.commit_vec.strong() <= snap.strong();
        } else {
          in_snap = vec_leq(e.commit_vec, snap);
        }
        if (in_snap && (!found || best_lc < e.lamport)) {
          best = e.value;
          best_lc = e.lamport;
          found = true;
        }
      }
    }
    return {best, best_lc};
  }

  void handle(ReplicaId from, const Prepare& p) {
    for (DcId i = 1; i <= num_dcs_; ++i)
      if (i != id_.dc) merge_uniform(i, p.snap.at(i));
    int64_t ts = clock_;
    prepared_causal_[p.tid] = {p.writes, ts};
    dirty_.touched = true;
    env_.send(id_, from, PrepareAck{p.tid, ts});
  }

  void handle(ReplicaId, const CommitMsg& c) {
    defer_until([this, c] { return clock_ >= c.commit_vec.at(id_.dc); },
                [this, c] {
                  auto it = prepared_causal_.find(c.tid);
                  if (it == prepared_causal_.end()) return;
                  PartitionWrites writes = it->second.writes;
                  prepared_causal_.erase(it);
                  for (const auto& [k, v] : writes)
                    append_log(k, v, c.commit_vec, c.lamport, c.tid);
                  committed_causal_[id_.dc].push_back(
                      {c.tid, writes, c.commit_vec, c.lamport});
                });
  }

  void handle_client(ClientId client, const UniformBarrierReq& b) {
    defer_until(
        [this, b] { return uniform_vec_.at(id_.dc) >= b.vec.at(id_.dc); },
        [this, client] { env_.send_client(id_, client, UniformBarrierResp{client}); });
  }

  void handle_client(ClientId client, const AttachReq& a) {
    defer_until(
        [this, a] {
          for (DcId i = 1; i <= num_dcs_; ++i)
            if (i != id_.dc && uniform_vec_.at(i) < a.vec.at(i)) return false;
          return true;
        },
        [this, client] { env_.send_client(id_, client, AttachResp{client}); });
  }

  // ==========================================================================
  // replication (Alg. 4)
  // ==========================================================================

  void propagate_local_txs() {
    if (prepared_causal_.empty()) {
      set_known(id_.dc, clock_);
    } else {
      int64_t min_ts = prepared_causal_.begin()->second.ts;
      for (const auto& [tid, p] : prepared_causal_) min_ts = std::min(min_ts, p.ts);
      set_known(id_.dc, min_ts - 1);
    }

    auto& pending = committed_causal_[id_.dc];
    std::vector<CausalTxRecord> txs;
    std::vector<CausalTxRecord> keep;
    for (auto& tx : pending) {
      if (tx.commit_vec.at(id_.dc) <= known_vec_.at(id_.dc))
        txs.push_back(tx);
      else
        keep.push_back(tx);
    }
    if (!txs.empty()) {
      std::sort(txs.begin(), txs.end(), [&](const auto& a, const auto& b) {
        return a.commit_vec.at(id_.dc) < b.commit_vec.at(id_.dc);
      });
      pending = keep;
      for (DcId i = 1; i <= num_dcs_; ++i)
        if (i != id_.dc) env_.send(id_, {i, id_.partition}, Replicate{id_.dc, txs});
      trace_protocol("replicate", Json{{"origin", id_.dc}, {"n", txs.size()}});
    } else {
      for (DcId i = 1; i <= num_dcs_; ++i)
        if (i != id_.dc)
          env_.send(id_, {i, id_.partition}, HeartbeatMsg{id_.dc, known_vec_.at(id_.dc)});
    }

    forward_remote_txs();
  }

  void handle(ReplicaId, const Replicate& r) {
    // FIFO channels deliver these in commitVec[origin] order per sender;
    // the sort makes batch order explicit.
    std::vector<CausalTxRecord> txs = r.txs;
    std::sort(txs.begin(), txs.end(), [&](const auto& a, const auto& b) {
      return a.commit_vec.at(r.origin) < b.commit_vec.at(r.origin);
    });
    for (const auto& tx : txs) {
      if (tx.commit_vec.at(r.origin) <= known_vec_.at(r.origin)) continue;
      for (const auto& [k, v] : tx.writes)
        append_log(k, v, tx.commit_vec, tx.lamport, tx.tid);
      committed_causal_[r.origin].push_back(tx);
      set_known(r.origin, tx.commit_vec.at(r.origin));
    }
  }

  void handle(ReplicaId, const HeartbeatMsg& h) {
    if (h.ts <= known_vec_.at(h.origin)) return;
    set_known(h.origin, h.ts);
  }

  /// Spread transactions from suspected-failed data centers (and our view of
  /// their clock) to peers that may not have received them.
  void forward_remote_txs() {
    if (env_.config().disable_forwarding) return;
    for (DcId j : env_.suspected()) {
      if (j == id_.dc) continue;
      for (DcId i = 1; i <= num_dcs_; ++i) {
        if (i == id_.dc || i == j || !env_.dc_alive(i)) continue;
        std::vector<CausalTxRecord> txs;
        for (const auto& tx : committed_causal_[j])
          if (tx.commit_vec.at(j) > global_matrix_[i].at(j)) txs.push_back(tx);
        if (!txs.empty()) {
          std::sort(txs.begin(), txs.end(), [&](const auto& a, const auto& b) {
            return a.commit_vec.at(j) < b.commit_vec.at(j);
          });
          env_.send(id_, {i, id_.partition}, Replicate{j, txs});
          trace_protocol("forward",
                         Json{{"about", j}, {"to", i}, {"n", txs.size()}});
        } else {
          env_.send(id_, {i, id_.partition}, HeartbeatMsg{j, known_vec_.at(j)});
        }
      }
    }
  }

  // ==========================================================================
  // replication: stability (Alg. 5)
  // ==========================================================================

  void broadcast_vecs() {
    for (PartitionId l = 1; l <= num_partitions_; ++l)
      env_.send(id_, {id_.dc, l}, KnownVecLocal{id_.partition, known_vec_});
    for (DcId i = 1; i <= num_dcs_; ++i)
      env_.send(id_, {i, id_.partition}, StableVecMsg{id_.dc, stable_vec_});
    for (DcId i = 1; i <= num_dcs_; ++i)
      env_.send(id_, {i, id_.partition}, KnownVecGlobal{id_.dc, known_vec_});
  }

  void handle(ReplicaId, const KnownVecLocal& m) {
    local_matrix_[m.from] = m.vec;
    VectorTimestamp st(num_dcs_);
    for (DcId i = 1; i <= num_dcs_; ++i) {
      int64_t mn = local_matrix_[1].at(i);
      for (PartitionId n = 2; n <= num_partitions_; ++n)
        mn = std::min(mn, local_matrix_[n].at(i));
      st.set(i, mn);
    }
    int64_t mn = local_matrix_[1].strong();
    for (PartitionId n = 2; n <= num_partitions_; ++n)
      mn = std::min(mn, local_matrix_[n].strong());
    st.set_strong(mn);
    if (!(st == stable_vec_)) {
      if (!vec_leq(stable_vec_, st))
        env_.note_violation("monotonic_stableVec",
                            Json{{"replica", id_.str()}});
      stable_vec_ = st;
      dirty_.stable = true;
      dirty_.touched = true;
    }
  }

  void handle(ReplicaId, const StableVecMsg& m) {
    stable_matrix_[m.from] = m.vec;
    for (DcId j = 1; j <= num_dcs_; ++j) {
      int64_t best = 0;
      for (const auto& g : groups_) {
        int64_t mn = stable_matrix_[g[0]].at(j);
        for (DcId h : g) mn = std::min(mn, stable_matrix_[h].at(j));
        best = std::max(best, mn);
      }
      merge_uniform(j, best);
    }
  }

  void handle(ReplicaId, const KnownVecGlobal& m) { global_matrix_[m.from] = m.vec; }

  // ==========================================================================
  // tcs: strong commit glue (Alg. 6)
  // ==========================================================================

  void handle_client(ClientId client, const CommitStrongReq& r) {
    TxId tid = r.tid;
    auto go = [this, client, tid, lc = r.lc] {
      Json ws = Json::array();
      for (const auto& [l, writes] : wbuff_[tid])
        for (const auto& [k, v] : writes)
          ws.push_back(Json::array({k, v}));
      Json rs = Json::array();
      for (Key k : rset_[tid]) rs.push_back(k);
      env_.tcs_action(Json{{"type", "tcs_certify"},
                           {"tid", to_json(tid)},
                           {"ws", ws},
                           {"rs", rs},
                           {"snap", to_json(snap_vec_[tid])},
                           {"client_lc", to_json(lc)}});
      tcs_certify(CertifyMode::Normal, tid, wbuff_[tid], rset_[tid],
                  snap_vec_[tid], lc,
                  [this, client, tid](Decision dec, VectorTimestamp cv,
                                      LamportStamp lamport, bool unknown) {
                    assert(!unknown);
                    Json act{{"type", "tcs_decide"},
                             {"tid", to_json(tid)},
                             {"decision", decision_str(dec)}};
                    if (dec == Decision::Commit) {
                      act["cv"] = to_json(cv);
                      act["lc"] = to_json(lamport);
                      env_.note_strong_committed(tid, cv, lamport, wbuff_[tid],
                                                 snap_vec_[tid], rset_[tid],
                                                 id_.dc);
                    }
                    env_.tcs_action(act);
                    cleanup_tx(tid);
                    env_.send_client(id_, client,
                                     CommitStrongResp{client, tid, dec, cv, lamport});
                  });
    };
    if (env_.config().skip_strong_uniform_barrier) {
      go();
    } else {
      VectorTimestamp snap = snap_vec_[tid];
      defer_until(
          [this, snap] { return uniform_vec_.at(id_.dc) >= snap.at(id_.dc); }, go);
    }
  }

  void deliver_updates(const std::vector<StrongDecided>& txs, int64_t ts) {
    Json jtxs = Json::array();
    for (const auto& tx : txs) {
      auto it = tx.wbuff.find(id_.partition);
      Json writes = Json::object();
      if (it != tx.wbuff.end())
        for (const auto& [k, v] : it->second) {
          append_log(k, v, tx.commit_vec, tx.lamport, tx.tid);
          writes[std::to_string(k)] = v;
        }
      set_known_strong(tx.commit_vec.strong());
      jtxs.push_back(Json{{"tid", to_json(tx.tid)},
                          {"writes", writes},
                          {"cv", to_json(tx.commit_vec)},
                          {"lc", to_json(tx.lamport)}});
    }
    env_.tcs_action(Json{{"type", "tcs_deliver"},
                         {"dc", id_.dc},
                         {"partition", id_.partition},
                         {"ts", ts},
                         {"txs", jtxs}});
  }

  void heartbeat_strong() {
    if (tcs_status_ != TcsStatus::Leader) return;
    if (env_.now() - tcs_last_strong_activity_ < env_.config().strong_hb_period)
      return;
    tcs_last_strong_activity_ = env_.now();
    TxId tid{id_.dc, id_.partition, ++tid_seq_};
    VectorTimestamp zero(num_dcs_);
    env_.tcs_action(Json{{"type", "tcs_certify"},
                         {"tid", to_json(tid)},
                         {"ws", Json::array()},
                         {"rs", Json::array()},
                         {"snap", to_json(zero)},
                         {"client_lc", to_json(LamportStamp{0, 0})}});
    tcs_certify(CertifyMode::Normal, tid, WriteBuffer{}, ReadSet{}, zero,
                LamportStamp{0, 0},
                [this, tid](Decision dec, VectorTimestamp cv, LamportStamp lamport,
                            bool unknown) {
                  assert(!unknown);
                  Json act{{"type", "tcs_decide"},
                           {"tid", to_json(tid)},
                           {"decision", decision_str(dec)}};
                  if (dec == Decision::Commit) {
                    act["cv"] = to_json(cv);
                    act["lc"] = to_json(lamport);
                  }
                  env_.tcs_action(act);
                });
  }

  // ==========================================================================
  // tcs: certification service at the coordinator (Alg. 7)
  // ==========================================================================

  struct CertifySession {
    int64_t rid = 0;
    CertifyMode mode = CertifyMode::Normal;
    TxId tid;
    WriteBuffer wbuff;
    ReadSet rset;
    VectorTimestamp snap;
    LamportStamp lamport;
    std::set<PartitionId> partitions;
    // per partition: ballot -> acks by DC
    std::map<PartitionId, std::map<int64_t, std::map<DcId, AcceptAck>>> acks;
    std::map<PartitionId, std::set<DcId>> unknown_acks;
    Tick last_send = 0;
    std::function<void(Decision, VectorTimestamp, LamportStamp, bool)> done;
  };

  void tcs_certify(CertifyMode mode, const TxId& tid, WriteBuffer wbuff,
                   ReadSet rset, VectorTimestamp snap, LamportStamp lamport,
                   std::function<void(Decision, VectorTimestamp, LamportStamp, bool)>
                       done) {
    CertifySession s;
    s.rid = env_.fresh_rid();
    s.mode = mode;
    s.tid = tid;
    s.wbuff = std::move(wbuff);
    s.rset = std::move(rset);
    s.snap = std::move(snap);
    s.lamport = lamport;
    for (const auto& [l, writes] : s.wbuff)
      if (!writes.empty()) s.partitions.insert(l);
    for (Key k : s.rset) s.partitions.insert(partition_of(k, num_partitions_));
    if (s.partitions.empty()) s.partitions.insert(id_.partition);  // heartbeat
    s.done = std::move(done);
    int64_t rid = s.rid;
    sessions_[rid] = std::move(s);
    tcs_send_prepares(sessions_[rid]);
  }

  void tcs_send_prepares(CertifySession& s) {
    s.last_send = env_.now();
    for (PartitionId l : s.partitions)
      env_.send(id_, env_.omega(l),
                PrepareStrong{id_, s.rid, s.mode, s.tid, s.wbuff, s.rset, s.snap,
                              s.lamport});
  }

  void tcs_retry() {
    // Coordinator side: re-drive sessions that have not completed.
    std::vector<int64_t> rids;
    for (auto& [rid, s] : sessions_)
      if (env_.now() - s.last_send >= env_.config().retry_period) rids.push_back(rid);
    for (int64_t rid : rids) {
      auto it = sessions_.find(rid);
      if (it != sessions_.end()) tcs_send_prepares(it->second);
    }
    // Leader side: re-drive stuck prepared transactions (Alg. 9 RETRY).
    if (tcs_status_ == TcsStatus::Leader) {
      std::vector<TxId> stuck;
      for (const auto& [tid, e] : tcs_prepared_) {
        bool executing = false;
        for (const auto& [rid, s] : sessions_)
          if (s.tid == tid) executing = true;
        if (!executing && env_.now() - tcs_prepared_at_[tid] >=
                              2 * env_.config().retry_period)
          stuck.push_back(tid);
      }
      for (const TxId& tid : stuck) {
        const auto& e = tcs_prepared_[tid];
        tcs_certify(CertifyMode::Normal, tid, e.wbuff, e.rset, e.snap_vec,
                    e.lamport, [](Decision, VectorTimestamp, LamportStamp, bool) {});
      }
    }
  }

  void tcs_session_incoming_ack(const AcceptAck& a) {
    for (auto& [rid, s] : sessions_) {
      if (s.tid != a.tid) continue;
      s.acks[a.partition][a.ballot][a.from.dc] = a;
      tcs_session_check(rid);
      return;
    }
  }

  void handle(ReplicaId, const AcceptAck& a) { tcs_session_incoming_ack(a); }

  void handle(ReplicaId, const UnknownTxAck& u) {
    auto it = sessions_.find(u.rid);
    if (it == sessions_.end() || it->second.tid != u.tid) return;
    it->second.unknown_acks[u.partition].insert(u.from.dc);
    tcs_session_check(u.rid);
  }

  void handle(ReplicaId, const AlreadyDecided& d) {
    std::vector<int64_t> rids;
    for (auto& [rid, s] : sessions_)
      if (s.tid == d.tid) rids.push_back(rid);
    for (int64_t rid : rids) {
      CertifySession s = std::move(sessions_[rid]);
      sessions_.erase(rid);
      // Re-propagate the decision in case some partition leaders lack it.
      for (PartitionId l : s.partitions) {
        int64_t b = 0;
        auto it = s.acks.find(l);
        if (it != s.acks.end() && !it->second.empty()) b = it->second.rbegin()->first;
        env_.send(id_, env_.omega(l),
                  DecisionMsg{b, d.tid, d.decision, d.commit_vec, d.lamport});
      }
      s.done(d.decision, d.commit_vec, d.lamport, false);
    }
  }

  void tcs_session_check(int64_t rid) {
    auto it = sessions_.find(rid);
    if (it == sessions_.end()) return;
    CertifySession& s = it->second;

    for (const auto& [l, dcs] : s.unknown_acks) {
      if (static_cast<int>(dcs.size()) >= f_ + 1) {
        CertifySession done = std::move(s);
        sessions_.erase(rid);
        done.done(Decision::Abort, VectorTimestamp(num_dcs_), LamportStamp{},
                  true);
        return;
      }
    }

    // A quorum of matching-ballot ACCEPT_ACKs for every accessed partition.
    std::map<PartitionId, const AcceptAck*> chosen;
    for (PartitionId l : s.partitions) {
      auto ait = s.acks.find(l);
      const AcceptAck* pick = nullptr;
      if (ait != s.acks.end())
        for (const auto& [ballot, by_dc] : ait->second)
          if (static_cast<int>(by_dc.size()) >= f_ + 1) pick = &by_dc.begin()->second;
      if (!pick) return;
      chosen[l] = pick;
    }

    VectorTimestamp cv = s.snap;
    int64_t max_ts = 0;
    LamportStamp lamport = s.lamport;
    Decision dec = Decision::Commit;
    for (const auto& [l, ack] : chosen) {
      max_ts = std::max(max_ts, ack->ts);
      if (ack->vote == Vote::Abort) dec = Decision::Abort;
      if (lamport.counter < ack->lamport.counter) lamport.counter = ack->lamport.counter;
    }
    cv.set_strong(max_ts);
    CertifySession done = std::move(s);
    sessions_.erase(rid);
    for (const auto& [l, ack] : chosen)
      env_.send(id_, env_.omega(l), DecisionMsg{ack->ballot, done.tid, dec, cv, lamport});
    done.done(dec, cv, lamport, false);
  }

  // ==========================================================================
  // tcs: certification check (Alg. 8)
  // ==========================================================================

  std::pair<Vote, LamportStamp> certification_check(const PartitionWrites& w,
                                                    const ReadSet& rset,
                                                    const VectorTimestamp& snap,
                                                    LamportStamp lc) {
    for (const auto& [tid, e] : tcs_prepared_) {
      if (e.vote != Vote::Commit) continue;
      auto wit = e.wbuff.find(id_.partition);
      if (wit != e.wbuff.end())
        for (const auto& [k, v] : wit->second)
          if (rset.count(k)) return {Vote::Abort, LamportStamp{}};
      for (Key k : e.rset)
        if (w.count(k)) return {Vote::Abort, LamportStamp{}};
    }
    for (const auto& [tid, e] : tcs_decided_) {
      if (e.decision != Decision::Commit) continue;
      if (!env_.config().mutate_skip_cert_check) {
        auto wit = e.wbuff.find(id_.partition);
        if (wit != e.wbuff.end()) {
          bool touches = false;
          for (const auto& [k, v] : wit->second)
            if (rset.count(k)) touches = true;
          if (touches && !vec_leq(e.commit_vec, snap))
            return {Vote::Abort, LamportStamp{}};
        }
      }
      if (lc.counter <= e.lamport.counter) lc.counter = e.lamport.counter + 1;
    }
    return {Vote::Commit, lc};
  }

  // ==========================================================================
  // tcs: atomic commit protocol (Alg. 9)
  // ==========================================================================

  void handle(ReplicaId from, const PrepareStrong& p) {
    if (tcs_status_ != TcsStatus::Leader && tcs_status_ != TcsStatus::Restoring)
      return;
    auto dit = tcs_decided_.find(p.tid);
    if (dit != tcs_decided_.end()) {
      env_.send(id_, from,
                AlreadyDecided{p.tid, dit->second.decision, dit->second.commit_vec,
                               dit->second.lamport});
      return;
    }
    auto pit = tcs_prepared_.find(p.tid);
    if (pit != tcs_prepared_.end()) {
      const StrongPrepared& e = pit->second;
      broadcast_accept(e, from);
      return;
    }
    if (p.mode == CertifyMode::Restoring) {
      for (DcId i = 1; i <= num_dcs_; ++i)
        env_.send(id_, {i, id_.partition}, UnknownTx{tcs_ballot_, p.rid, p.tid, from});
      return;
    }
    if (tcs_status_ == TcsStatus::Leader) {
      if (clock_ <= p.snap.strong()) {
        defer_until([this, p] { return clock_ > p.snap.strong(); },
                    [this, from, p] { handle(from, p); });
        return;
      }
      tcs_last_strong_activity_ = env_.now();
      int64_t ts = clock_;
      auto pw = p.wbuff.find(id_.partition);
      auto [vote, lc] = certification_check(
          pw == p.wbuff.end() ? PartitionWrites{} : pw->second, p.rset, p.snap,
          p.lamport);
      StrongPrepared e{p.tid, p.wbuff, p.rset, p.snap, vote, ts, lc};
      // Record locally before broadcasting so a concurrent duplicate
      // PREPARE_STRONG re-accepts the same vote and timestamp.
      tcs_prepared_[p.tid] = e;
      tcs_prepared_at_[p.tid] = env_.now();
      dirty_.touched = true;
      broadcast_accept(e, from);
    }
  }

  void broadcast_accept(const StrongPrepared& e, ReplicaId coord) {
    for (DcId i = 1; i <= num_dcs_; ++i)
      env_.send(id_, {i, id_.partition},
                AcceptMsg{tcs_ballot_, e.tid, e.wbuff, e.rset, e.snap_vec, e.vote,
                          e.ts, coord, e.lamport});
  }

  void handle(ReplicaId, const AcceptMsg& a) {
    if (tcs_ballot_ != a.ballot) return;
    if (tcs_status_ == TcsStatus::Recovering) return;
    tcs_last_strong_activity_ = env_.now();
    tcs_prepared_[a.tid] =
        StrongPrepared{a.tid, a.wbuff, a.rset, a.snap, a.vote, a.ts, a.lamport};
    if (!tcs_prepared_at_.count(a.tid)) tcs_prepared_at_[a.tid] = env_.now();
    dirty_.touched = true;
    env_.send(id_, a.coord,
              AcceptAck{id_, id_.partition, a.ballot, a.tid, a.vote, a.ts, a.lamport});
  }

  void handle(ReplicaId, const DecisionMsg& d) {
    if (tcs_status_ != TcsStatus::Leader && tcs_status_ != TcsStatus::Restoring)
      return;
    if (tcs_ballot_ != d.ballot) return;
    defer_until([this, d] { return clock_ >= d.commit_vec.strong(); },
                [this, d] {
                  if (tcs_ballot_ != d.ballot) return;
                  for (DcId i = 1; i <= num_dcs_; ++i)
                    env_.send(id_, {i, id_.partition},
                              LearnDecision{d.ballot, d.tid, d.decision,
                                            d.commit_vec, d.lamport});
                });
  }

  void handle(ReplicaId, const LearnDecision& l) {
    if (tcs_status_ == TcsStatus::Recovering) return;
    if (tcs_ballot_ != l.ballot) return;
    auto pit = tcs_prepared_.find(l.tid);
    if (pit == tcs_prepared_.end()) return;
    WriteBuffer wbuff = pit->second.wbuff;
    tcs_prepared_.erase(pit);
    tcs_prepared_at_.erase(l.tid);
    tcs_decided_[l.tid] =
        StrongDecided{l.tid, wbuff, l.decision, l.commit_vec, l.lamport};
    dirty_.touched = true;
  }

  /// Standing delivery rule (leader only): ship the smallest committed strong
  /// timestamp that no in-flight prepared transaction can still undercut.
  void tcs_try_deliver() {
    if (tcs_status_ != TcsStatus::Leader) return;
    int64_t candidate = 0;
    for (const auto& [tid, e] : tcs_decided_) {
      if (e.decision != Decision::Commit) continue;
      int64_t ts = e.commit_vec.strong();
      if (ts <= tcs_last_delivered_) continue;
      if (candidate == 0 || ts < candidate) candidate = ts;
    }
    if (candidate == 0) return;
    for (const auto& [tid, e] : tcs_prepared_)
      if (e.vote == Vote::Commit && tcs_last_delivered_ < e.ts && e.ts <= candidate)
        return;
    if (candidate == tcs_last_deliver_requested_) return;
    tcs_last_deliver_requested_ = candidate;
    for (DcId i = 1; i <= num_dcs_; ++i)
      env_.send(id_, {i, id_.partition}, DeliverMsg{tcs_ballot_, candidate});
  }

  void handle(ReplicaId, const DeliverMsg& d) {
    if (tcs_status_ != TcsStatus::Leader && tcs_status_ != TcsStatus::Follower)
      return;
    if (tcs_ballot_ != d.ballot || tcs_last_delivered_ >= d.ts) return;
    deliver_range(d.ts);
  }

  /// Delivers all committed entries in (lastDelivered, ts], grouped by strong
  /// timestamp in increasing order.
  void deliver_range(int64_t ts) {
    std::map<int64_t, std::vector<StrongDecided>> groups;
    for (const auto& [tid, e] : tcs_decided_)
      if (e.decision == Decision::Commit && e.commit_vec.strong() > tcs_last_delivered_ &&
          e.commit_vec.strong() <= ts)
        groups[e.commit_vec.strong()].push_back(e);
    tcs_last_delivered_ = ts;
    dirty_.touched = true;
    for (auto& [group_ts, txs] : groups) {
      std::sort(txs.begin(), txs.end(),
                [](const auto& a, const auto& b) { return a.tid < b.tid; });
      deliver_updates(txs, group_ts);
    }
  }

  void handle(ReplicaId, const UnknownTx& u) {
    if (tcs_ballot_ != u.ballot) return;
    if (tcs_status_ == TcsStatus::Recovering) return;
    env_.send(id_, u.coord, UnknownTxAck{id_, id_.partition, u.rid, u.tid});
  }

  // ==========================================================================
  // tcs: recovery (Alg. 10)
  // ==========================================================================

  void handle(ReplicaId, const OmegaChange& o) {
    if (o.leader == tcs_trusted_) return;
    tcs_trusted_ = o.leader;
    if (tcs_trusted_ == id_) {
      tcs_recover();
    } else {
      env_.send(id_, tcs_trusted_, NackMsg{id_, tcs_ballot_});
    }
  }

  void handle(ReplicaId, const NackMsg& n) {
    if (tcs_trusted_ != id_ || n.ballot <= tcs_ballot_) return;
    tcs_ballot_ = n.ballot;
    tcs_recover();
  }

  void tcs_recover() {
    int64_t b = tcs_ballot_ + 1;
    while (leader_dc(b) != id_.dc) ++b;
    for (DcId i = 1; i <= num_dcs_; ++i)
      env_.send(id_, {i, id_.partition}, NewLeader{id_, b});
  }

  DcId leader_dc(int64_t ballot) const {
    return static_cast<DcId>(ballot % num_dcs_) + 1;
  }

  void handle(ReplicaId, const NewLeader& n) {
    if (tcs_trusted_ == n.from && tcs_ballot_ < n.ballot) {
      set_tcs_status(TcsStatus::Recovering);
      tcs_ballot_ = n.ballot;
      tcs_do_not_wait_for_.clear();
      NewLeaderAck ack{id_, tcs_ballot_, tcs_cballot_, {}, {}};
      for (const auto& [tid, e] : tcs_prepared_) ack.prepared.push_back(e);
      for (const auto& [tid, e] : tcs_decided_) ack.decided.push_back(e);
      env_.send(id_, n.from, std::move(ack));
    } else {
      env_.send(id_, n.from, NackMsg{id_, tcs_ballot_});
    }
  }

  void handle(ReplicaId, const NewLeaderAck& a) {
    if (tcs_status_ != TcsStatus::Recovering || tcs_ballot_ != a.ballot) return;
    recovery_acks_[a.from] = a;
    if (static_cast<int>(recovery_acks_.size()) < f_ + 1) return;

    int64_t max_cballot = 0;
    for (const auto& [from, ack] : recovery_acks_)
      max_cballot = std::max(max_cballot, ack.cballot);
    tcs_decided_.clear();
    std::map<TxId, StrongPrepared> merged_prepared;
    for (const auto& [from, ack] : recovery_acks_) {
      if (ack.cballot != max_cballot) continue;
      for (const auto& e : ack.decided) tcs_decided_[e.tid] = e;
      for (const auto& e : ack.prepared) merged_prepared[e.tid] = e;
    }
    tcs_prepared_.clear();
    tcs_prepared_at_.clear();
    for (const auto& [tid, e] : merged_prepared) {
      if (tcs_decided_.count(tid)) continue;
      tcs_prepared_[tid] = e;
      tcs_prepared_at_[tid] = env_.now();
    }
    recovery_acks_.clear();
    dirty_.touched = true;

    int64_t max_prep = 0, max_dec = 0;
    for (const auto& [tid, e] : tcs_prepared_) max_prep = std::max(max_prep, e.ts);
    for (const auto& [tid, e] : tcs_decided_)
      max_dec = std::max(max_dec, e.commit_vec.strong());
    int64_t b = tcs_ballot_;
    defer_until(
        [this, max_prep, max_dec] {
          return clock_ >= std::max(max_prep, max_dec);
        },
        [this, b] {
          if (tcs_status_ != TcsStatus::Recovering || tcs_ballot_ != b) return;
          tcs_cballot_ = b;
          new_state_acks_.clear();
          NewState st{id_, b, {}, {}, tcs_last_delivered_};
          for (const auto& [tid, e] : tcs_prepared_) st.prepared.push_back(e);
          for (const auto& [tid, e] : tcs_decided_) st.decided.push_back(e);
          for (DcId i = 1; i <= num_dcs_; ++i)
            if (i != id_.dc) env_.send(id_, {i, id_.partition}, st);
          trace_protocol("tcs_new_state",
                         Json{{"partition", id_.partition}, {"ballot", b}});
        });
  }

  void handle(ReplicaId, const NewState& s) {
    if (tcs_status_ != TcsStatus::Recovering || s.ballot < tcs_ballot_) return;
    tcs_ballot_ = s.ballot;
    tcs_cballot_ = s.ballot;
    tcs_prepared_.clear();
    tcs_prepared_at_.clear();
    for (const auto& e : s.prepared) {
      tcs_prepared_[e.tid] = e;
      tcs_prepared_at_[e.tid] = env_.now();
    }
    tcs_decided_.clear();
    for (const auto& e : s.decided) tcs_decided_[e.tid] = e;
    dirty_.touched = true;
    // Catch up with deliveries made under previous ballots.
    if (s.last_delivered > tcs_last_delivered_) deliver_range(s.last_delivered);
    set_tcs_status(TcsStatus::Follower);
    env_.send(id_, s.from, NewStateAck{id_, s.ballot});
  }

  void handle(ReplicaId, const NewStateAck& a) {
    if (tcs_status_ != TcsStatus::Recovering || tcs_ballot_ != a.ballot) return;
    new_state_acks_.insert(a.from);
    // Together with this replica the acks must form a quorum.
    if (static_cast<int>(new_state_acks_.size()) + 1 < f_ + 1) return;
    set_tcs_status(TcsStatus::Restoring);
    for (const auto& [tid, e] : tcs_prepared_) {
      tcs_certify(CertifyMode::Restoring, tid, e.wbuff, e.rset, e.snap_vec,
                  e.lamport,
                  [this, tid](Decision, VectorTimestamp, LamportStamp, bool unknown) {
                    if (unknown) {
                      tcs_do_not_wait_for_.insert(tid);
                      env_.tcs_action(Json{{"type", "tcs_do_not_wait_for"},
                                           {"dc", id_.dc},
                                           {"partition", id_.partition},
                                           {"tid", to_json(tid)}});
                    }
                  });
    }
  }

  /// Leadership resumes once every surviving prepared entry is either decided
  /// (and thus gone from preparedStrong) or known to be undecidable.
  bool tcs_check_restoring_done() {
    if (tcs_status_ != TcsStatus::Restoring) return false;
    for (const auto& [tid, e] : tcs_prepared_)
      if (!tcs_do_not_wait_for_.count(tid)) return false;
    for (const TxId& tid : tcs_do_not_wait_for_) {
      tcs_prepared_.erase(tid);
      tcs_prepared_at_.erase(tid);
    }
    tcs_do_not_wait_for_.clear();
    set_tcs_status(TcsStatus::Leader);
    return true;
  }

  void set_tcs_status(TcsStatus s) {
    if (tcs_status_ == s) return;
    tcs_status_ = s;
    tcs_last_deliver_requested_ = 0;
    dirty_.touched = true;
    trace_protocol("tcs_status", Json{{"partition", id_.partition},
                                      {"status", tcs_status_str(s)},
                                      {"ballot", tcs_ballot_}});
  }

  // ==========================================================================

  void trace_protocol(const std::string& type, Json detail) {
    if (!env_.config().trace_protocol) return;
    detail["type"] = type;
    detail["replica"] = id_.str();
    env_.trace(std::move(detail));
  }

  SimEnv& env_;
  ReplicaId id_;
  int num_dcs_;
  int num_partitions_;
  int f_;
  std::vector<std::vector<DcId>> groups_;

  int64_t clock_ = 0;
  int64_t tid_seq_ = 0;

  // causal state
  std::map<Key, std::vector<LogEntry>> op_log_;
  VectorTimestamp known_vec_, stable_vec_, uniform_vec_;
  std::map<TxId, VectorTimestamp> snap_vec_;
  std::map<TxId, WriteBuffer> wbuff_;
  std::map<TxId, ReadSet> rset_;
  std::map<TxId, PreparedCausal> prepared_causal_;
  std::map<DcId, std::vector<CausalTxRecord>> committed_causal_;
  std::map<PartitionId, VectorTimestamp> local_matrix_;
  std::map<DcId, VectorTimestamp> stable_matrix_, global_matrix_;
  std::map<TxId, ClientId> pending_reads_;

  struct CausalCommit {
    ClientId client = 0;
    LamportStamp lamport;
    VectorTimestamp commit_vec;
    std::set<PartitionId> waiting;
  };
  std::map<TxId, CausalCommit> causal_commits_;

  std::vector<Wait> waits_;

  // TCS state for this replica's partition
  TcsStatus tcs_status_ = TcsStatus::Follower;
  int64_t tcs_ballot_ = 0;
  int64_t tcs_cballot_ = 0;
  ReplicaId tcs_trusted_;
  std::map<TxId, StrongPrepared> tcs_prepared_;
  std::map<TxId, StrongDecided> tcs_decided_;
  std::map<TxId, Tick> tcs_prepared_at_;
  int64_t tcs_last_delivered_ = 0;
  int64_t tcs_last_deliver_requested_ = 0;
  std::set<TxId> tcs_do_not_wait_for_;
  std::map<ReplicaId, NewLeaderAck> recovery_acks_;
  std::set<ReplicaId> new_state_acks_;
  std::map<int64_t, CertifySession> sessions_;
  Tick tcs_last_strong_activity_ = 0;

  DirtyState dirty_;
};

}  // namespace unistore

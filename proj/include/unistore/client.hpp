// Copyright 2026 the unistore-sim authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file or http://www.apache.org/licenses/LICENSE-2.0
#pragma once

#include <cassert>
#include <optional>

#include "unistore/core.hpp"
#include "unistore/messages.hpp"
#include "unistore/scenario.hpp"
#include "unistore/trace.hpp"

namespace unistore {

class ClientEnv {
 public:
  virtual ~ClientEnv() = default;
  virtual Tick now() const = 0;
  virtual const Scenario& config() const = 0;
  virtual void send_to_replica(ClientId from, ReplicaId to, Message m) = 0;
  virtual bool dc_alive(DcId d) const = 0;
  virtual std::optional<Tick> crash_time(DcId d) const = 0;
  /// Would a fresh transaction at `dc` observe `value` under `key`?
  virtual bool value_visible_at(DcId dc, Key key, Value value) const = 0;
  virtual uint64_t rand() = 0;
  virtual void trace(Json e) = 0;
  virtual void note_violation(const std::string& check, Json detail) = 0;
  /// A uniform barrier completed with the given causal past and Lamport stamp.
  virtual void note_barrier(const VectorTimestamp& ts, const LamportStamp& lc) = 0;
};

/// Scripted client session: one outstanding request at a time, session
/// vectors and Lamport clock maintained exactly as the protocol's client
/// operations prescribe.
class Client {
 public:
  Client(ClientEnv& env, const ClientScript& script)
      : env_(env), script_(script), id_(script.id), dc_(script.dc),
        past_(env.config().num_dcs) {}

  ClientId id() const { return id_; }
  DcId dc() const { return dc_; }
  const VectorTimestamp& past_vec() const { return past_; }
  int64_t lamport() const { return lc_; }

  bool done() const { return op_idx_ >= script_.ops.size() && !in_flight_; }
  bool blocked() const { return blocked_; }
  bool terminal() const { return done() || blocked(); }
  bool waiting_on_condition() const { return !terminal() && !in_flight_; }

  /// Drives the script forward; called whenever the client might be able to
  /// proceed (startup, replies, condition polls).
  void wake() {
    if (terminal() || in_flight_) return;
    while (op_idx_ < script_.ops.size()) {
      ClientOp& op = script_.ops[op_idx_];
      if (std::holds_alternative<OpWaitTick>(op)) {
        if (env_.now() < std::get<OpWaitTick>(op).tick) return;
        ++op_idx_;
        continue;
      }
      if (std::holds_alternative<OpAwaitVisible>(op)) {
        const auto& a = std::get<OpAwaitVisible>(op);
        if (!env_.value_visible_at(dc_, a.key, a.value)) return;
        ++op_idx_;
        continue;
      }
      if (std::holds_alternative<OpAwaitCrash>(op)) {
        const auto& a = std::get<OpAwaitCrash>(op);
        auto t = env_.crash_time(a.dc);
        if (!t || env_.now() < *t + a.delta) return;
        ++op_idx_;
        continue;
      }
      if (backoff_until_ && env_.now() < *backoff_until_) return;
      backoff_until_.reset();
      issue_current_op();
      return;
    }
  }

  void on_reply(const Message& m) {
    in_flight_ = false;
    std::visit([&](const auto& r) { reply(r); }, m);
    wake();
  }

  /// Index of the last fully completed script op, for crash triggers.
  int completed_ops() const { return completed_ops_; }

  bool in_flight() const { return in_flight_; }
  ReplicaId pending_target() const { return pending_target_; }
  /// Called by the harness when the replica this client is waiting on died.
  void mark_blocked() { blocked_ = true; }

 private:
  void issue_current_op() {
    ClientOp& op = script_.ops[op_idx_];
    if (std::holds_alternative<OpTx>(op)) {
      start_tx(std::get<OpTx>(op));
    } else if (std::holds_alternative<OpBarrier>(op)) {
      send(pick_replica(dc_, std::nullopt), UniformBarrierReq{id_, past_});
    } else if (std::holds_alternative<OpAttach>(op)) {
      DcId j = std::get<OpAttach>(op).dc;
      send(pick_replica(j, std::nullopt), AttachReq{id_, past_});
    }
  }

  void start_tx(const OpTx& tx) {
    coord_ = pick_replica(dc_, tx.coord);
    action_idx_ = 0;
    send(coord_, StartTxReq{id_, past_});
  }

  ReplicaId pick_replica(DcId d, std::optional<PartitionId> pin) {
    PartitionId m = pin ? *pin
                        : static_cast<PartitionId>(
                              env_.rand() % env_.config().num_partitions + 1);
    return {d, m};
  }

  void send(ReplicaId to, Message m) {
    if (!env_.dc_alive(to.dc)) {
      blocked_ = true;  // a request to a crashed DC never returns
      return;
    }
    in_flight_ = true;
    pending_target_ = to;
    env_.send_to_replica(id_, to, std::move(m));
  }

  const OpTx& current_tx() const { return std::get<OpTx>(script_.ops[op_idx_]); }

  void next_action() {
    const OpTx& tx = current_tx();
    if (action_idx_ < tx.actions.size()) {
      const TxAction& a = tx.actions[action_idx_];
      if (a.is_read)
        send(coord_, DoReadReq{id_, ctid_, a.key});
      else
        send(coord_, DoUpdateReq{id_, ctid_, a.key, a.value});
      return;
    }
    lc_ += 1;
    if (tx.strong)
      send(coord_, CommitStrongReq{id_, ctid_, LamportStamp{lc_, id_}});
    else
      send(coord_, CommitCausalReq{id_, ctid_, LamportStamp{lc_, id_}});
  }

  // --- replies ---

  void reply(const StartTxResp& r) {
    ctid_ = r.tid;
    env_.trace(Json{{"type", "start"},
                    {"client", id_},
                    {"tid", to_json(r.tid)},
                    {"dc", dc_},
                    {"coord", coord_.partition},
                    {"snap", to_json(r.snap)}});
    next_action();
  }

  void reply(const DoReadResp& r) {
    if (r.writer && !env_.config().mutate_drop_lamport_merge)
      lc_ = std::max(lc_, r.writer->counter);
    Json e{{"type", "read"},
           {"client", id_},
           {"tid", to_json(r.tid)},
           {"key", r.key},
           {"value", r.value}};
    e["writer"] = r.writer ? to_json(*r.writer) : Json(nullptr);
    env_.trace(std::move(e));
    ++action_idx_;
    next_action();
  }

  void reply(const DoUpdateResp& r) {
    const TxAction& a = current_tx().actions[action_idx_];
    env_.trace(Json{{"type", "update"},
                    {"client", id_},
                    {"tid", to_json(r.tid)},
                    {"key", a.key},
                    {"value", a.value}});
    ++action_idx_;
    next_action();
  }

  void reply(const CommitCausalResp& r) {
    update_past(r.commit_vec);
    env_.trace(Json{{"type", "commit_causal"},
                    {"client", id_},
                    {"tid", to_json(r.tid)},
                    {"dc", dc_},
                    {"cv", to_json(r.commit_vec)},
                    {"lc", to_json(LamportStamp{lc_, id_})},
                    {"read_only", r.read_only}});
    finish_op();
  }

  void reply(const CommitStrongResp& r) {
    Json e{{"type", "commit_strong"},
           {"client", id_},
           {"tid", to_json(r.tid)},
           {"dc", dc_},
           {"decision", decision_str(r.decision)}};
    if (r.decision == Decision::Commit) {
      update_past(r.commit_vec);
      lc_ = r.lamport.counter;
      e["cv"] = to_json(r.commit_vec);
      e["lc"] = to_json(LamportStamp{lc_, id_});
    }
    env_.trace(std::move(e));
    if (r.decision == Decision::Abort) {
      int& left = retries_left_.emplace(retries_left_ ? *retries_left_
                                                      : current_tx().max_retries);
      if (left != 0) {
        if (left > 0) --left;
        backoff_until_ = env_.now() + 5;  // re-execute with a fresh tid
        return;
      }
    }
    finish_op();
  }

  void reply(const UniformBarrierResp&) {
    lc_ += 1;
    env_.note_barrier(past_, LamportStamp{lc_, id_});
    env_.trace(Json{{"type", "barrier"},
                    {"client", id_},
                    {"dc", dc_},
                    {"ts", to_json(past_)},
                    {"lc", to_json(LamportStamp{lc_, id_})}});
    finish_op();
  }

  void reply(const AttachResp&) {
    lc_ += 1;
    DcId from = dc_;
    dc_ = std::get<OpAttach>(script_.ops[op_idx_]).dc;
    env_.trace(Json{{"type", "attach"},
                    {"client", id_},
                    {"from_dc", from},
                    {"to_dc", dc_},
                    {"ts", to_json(past_)},
                    {"lc", to_json(LamportStamp{lc_, id_})}});
    finish_op();
  }

  template <typename M>
  void reply(const M&) {
    assert(false && "unexpected message at client");
  }

  void update_past(const VectorTimestamp& cv) {
    if (!vec_leq(past_, cv))
      env_.note_violation("monotonic_pastVec",
                          Json{{"client", id_}, {"old", to_json(past_)},
                               {"new", to_json(cv)}});
    past_ = cv;
  }

  void finish_op() {
    retries_left_.reset();
    ++op_idx_;
    completed_ops_ = static_cast<int>(op_idx_);
  }

  ClientEnv& env_;
  ClientScript script_;
  ClientId id_;

  // Session state
  int64_t lc_ = 0;
  DcId dc_;
  ReplicaId coord_;
  TxId ctid_;
  VectorTimestamp past_;

  // Script progress
  size_t op_idx_ = 0;
  size_t action_idx_ = 0;
  bool in_flight_ = false;
  bool blocked_ = false;
  int completed_ops_ = 0;
  std::optional<int> retries_left_;
  std::optional<Tick> backoff_until_;
  ReplicaId pending_target_;
};

}  // namespace unistore

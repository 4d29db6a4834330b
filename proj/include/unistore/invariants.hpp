// Copyright 2026 the unistore-sim authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file or http://www.apache.org/licenses/LICENSE-2.0
#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <vector>

#include "unistore/replica.hpp"

namespace unistore {

/// A committed transaction as seen by the omniscient harness.
struct CommittedInfo {
  TxId tid;
  bool strong = false;
  DcId origin = 0;
  VectorTimestamp commit_vec;
  LamportStamp lamport;
  WriteBuffer writes;
  VectorTimestamp snap;  // strong only
  ReadSet rset;          // strong only

  bool writes_partition(PartitionId m) const {
    auto it = writes.find(m);
    return it != writes.end() && !it->second.empty();
  }
};

inline bool txs_conflict(const CommittedInfo& a, const CommittedInfo& b) {
  // LWW registers: conflict iff one's read-or-write set intersects the
  // other's write set. W(t) is always a subset of R(t) here.
  auto writes_key = [](const CommittedInfo& t, Key k) {
    for (const auto& [m, w] : t.writes)
      if (w.count(k)) return true;
    return false;
  };
  for (Key k : a.rset)
    if (writes_key(b, k)) return true;
  for (Key k : b.rset)
    if (writes_key(a, k)) return true;
  return false;
}

/// Per-event assertions of the replication/uniformity properties against the
/// simulator's omniscient view of all replica states.
class Invariants {
 public:
  using Report = std::function<void(const std::string&, Json)>;

  Invariants(const std::map<ReplicaId, std::unique_ptr<Replica>>& replicas,
             int num_dcs, int num_partitions, int f, bool enabled, Report report)
      : replicas_(replicas),
        num_dcs_(num_dcs),
        num_partitions_(num_partitions),
        f_(f),
        enabled_(enabled),
        report_(std::move(report)) {}

  const std::map<TxId, CommittedInfo>& committed() const { return committed_; }
  const std::set<TxId>& applied(ReplicaId r) const {
    static const std::set<TxId> empty;
    auto it = applied_.find(r);
    return it == applied_.end() ? empty : it->second;
  }

  /// Digest one event's worth of state changes at replica `r`.
  void after_event(Replica& r, Tick now) {
    DirtyState& d = r.dirty();
    for (const auto& [key, tid] : d.appended) {
      bool fresh = applied_by_key_[r.id()].insert({key, tid}).second;
      if (!fresh && enabled_)
        report_("oplog_append_once",
                Json{{"replica", r.id().str()}, {"key", key}, {"tid", tid.str()}});
      applied_[r.id()].insert(tid);
    }
    if (!enabled_) {
      d.clear();
      return;
    }
    if (r.clock() < r.known_vec().at(r.id().dc))
      report_("knownVec_le_clock", Json{{"replica", r.id().str()}});
    if (r.clock() - now > kClockSkewBound || now - r.clock() > kClockSkewBound)
      report_("clock_skew", Json{{"replica", r.id().str()},
                                 {"clock", r.clock()},
                                 {"now", now}});
    for (DcId i : d.known_entries) check_p1(r, i);
    if (d.known_strong) check_p6(r);
    if (d.stable) check_p2(r);
    for (DcId i : d.uniform_entries) check_p3(r, i);
    d.clear();
  }

  void on_committed(const CommittedInfo& info) {
    if (info.strong) {
      if (enabled_) check_p5(info);
      strong_by_ts_.emplace_back(info.commit_vec.strong(), info.tid);
      std::sort(strong_by_ts_.begin(), strong_by_ts_.end());
    } else {
      auto& v = causal_by_origin_[info.origin];
      v.emplace_back(info.commit_vec.at(info.origin), info.tid);
      std::sort(v.begin(), v.end());
    }
    committed_[info.tid] = info;
    if (!enabled_) return;
    // A replica whose frontier already covers the new transaction must
    // have applied it.
    for (const auto& [rid, rep] : replicas_) {
      if (!info.writes_partition(rid.partition)) continue;
      bool covered = info.strong
                         ? rep->known_vec().strong() >= info.commit_vec.strong()
                         : rep->known_vec().at(info.origin) >=
                               info.commit_vec.at(info.origin);
      if (covered && !applied(rid).count(info.tid))
        report_(info.strong ? "property6" : "property1",
                Json{{"replica", rid.str()},
                     {"tid", info.tid.str()},
                     {"at", "registration"}});
    }
  }

  /// Property 4, finite form: at the end of the run, every update transaction
  /// covered by some replica's uniformVec must be stored at all correct DCs.
  void end_of_run(const std::set<DcId>& correct) {
    if (!enabled_) return;
    for (const auto& [tid, info] : committed_) {
      bool has_writes = false;
      for (const auto& [m, w] : info.writes) has_writes |= !w.empty();
      if (!has_writes) continue;
      bool uniform = false;
      for (const auto& [rid, rep] : replicas_)
        if (vec_leq_dc(info.commit_vec, rep->uniform_vec())) uniform = true;
      if (!uniform) continue;
      for (DcId c : correct)
        for (const auto& [m, w] : info.writes) {
          if (w.empty()) continue;
          ReplicaId rid{c, m};
          if (!applied(rid).count(tid))
            report_("property4",
                    Json{{"tid", tid.str()}, {"replica", rid.str()}});
        }
    }
  }

 private:
  static constexpr int64_t kClockSkewBound = 96;

  // Property 1: replica p^m_d stores updates to m by every transaction from
  // DC i with commitVec[i] <= knownVec[i]. Amortized over the watermark.
  void check_p1(Replica& r, DcId i) {
    int64_t known = r.known_vec().at(i);
    int64_t& checked = checked_causal_[r.id()][i];
    auto it = causal_by_origin_.find(i);
    if (it != causal_by_origin_.end()) {
      for (const auto& [cv_i, tid] : it->second) {
        if (cv_i <= checked) continue;
        if (cv_i > known) break;
        const CommittedInfo& info = committed_.at(tid);
        if (info.writes_partition(r.id().partition) && !applied(r.id()).count(tid))
          report_("property1",
                  Json{{"replica", r.id().str()}, {"tid", tid.str()},
                       {"knownVec_i", known}, {"cv_i", cv_i}});
      }
    }
    checked = std::max(checked, known);
  }

  // Property 6: same, for strong transactions against knownVec[strong].
  void check_p6(Replica& r) {
    int64_t known = r.known_vec().strong();
    int64_t& checked = checked_strong_[r.id()];
    for (const auto& [ts, tid] : strong_by_ts_) {
      if (ts <= checked) continue;
      if (ts > known) break;
      const CommittedInfo& info = committed_.at(tid);
      if (info.writes_partition(r.id().partition) && !applied(r.id()).count(tid))
        report_("property6",
                Json{{"replica", r.id().str()}, {"tid", tid.str()},
                     {"knownVec_strong", known}, {"cv_strong", ts}});
    }
    checked = std::max(checked, known);
  }

  // Property 2: stableVec at any replica is dominated by knownVec at every
  // replica of the same DC.
  void check_p2(Replica& r) {
    for (const auto& [rid, rep] : replicas_) {
      if (rid.dc != r.id().dc) continue;
      if (!vec_leq(r.stable_vec(), rep->known_vec()))
        report_("property2", Json{{"stable_at", r.id().str()},
                                  {"known_at", rid.str()},
                                  {"stable", to_json(r.stable_vec())},
                                  {"known", to_json(rep->known_vec())}});
    }
  }

  // Property 3: every uniformVec entry is backed by a group of f+1 DCs,
  // including this one, all of whose replicas store the prefix. Also checks
  // uniformVec[i] <= knownVec[i] across the replica's own DC.
  void check_p3(Replica& r, DcId i) {
    int64_t v = r.uniform_vec().at(i);
    std::vector<DcId> holding;
    for (DcId j = 1; j <= num_dcs_; ++j) {
      bool all = true;
      for (PartitionId n = 1; n <= num_partitions_; ++n)
        if (replicas_.at(ReplicaId{j, n})->known_vec().at(i) < v) all = false;
      if (all) holding.push_back(j);
    }
    bool self_in = std::count(holding.begin(), holding.end(), r.id().dc) > 0;
    if (!self_in || static_cast<int>(holding.size()) < f_ + 1)
      report_("property3", Json{{"replica", r.id().str()},
                                {"entry", i},
                                {"value", v},
                                {"holding_dcs", holding}});
  }

  // Property 5: conflicting committed strong transactions are ordered by
  // their strong timestamps, consistently with snapshots and Lamport stamps.
  void check_p5(const CommittedInfo& t) {
    for (const auto& [tid2, t2] : committed_) {
      if (!t2.strong || !txs_conflict(t, t2)) continue;
      const CommittedInfo& a =
          t.commit_vec.strong() < t2.commit_vec.strong() ? t : t2;
      const CommittedInfo& b =
          t.commit_vec.strong() < t2.commit_vec.strong() ? t2 : t;
      bool ok = t.commit_vec.strong() != t2.commit_vec.strong() &&
                vec_leq(a.commit_vec, b.snap) &&
                a.lamport.counter < b.lamport.counter;
      if (!ok)
        report_("property5", Json{{"t1", a.tid.str()},
                                  {"t2", b.tid.str()},
                                  {"cv1", to_json(a.commit_vec)},
                                  {"cv2", to_json(b.commit_vec)},
                                  {"snap2", to_json(b.snap)}});
    }
  }

  const std::map<ReplicaId, std::unique_ptr<Replica>>& replicas_;
  int num_dcs_;
  int num_partitions_;
  int f_;
  bool enabled_;
  Report report_;

  std::map<TxId, CommittedInfo> committed_;
  std::map<DcId, std::vector<std::pair<int64_t, TxId>>> causal_by_origin_;
  std::vector<std::pair<int64_t, TxId>> strong_by_ts_;
  std::map<ReplicaId, std::set<TxId>> applied_;
  std::map<ReplicaId, std::set<std::pair<Key, TxId>>> applied_by_key_;
  std::map<ReplicaId, std::map<DcId, int64_t>> checked_causal_;
  std::map<ReplicaId, int64_t> checked_strong_;
};

}  // namespace unistore

// Copyright 2026 the unistore-sim authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file or http://www.apache.org/licenses/LICENSE-2.0
#pragma once

#include <cstdint>
#include <compare>
#include <stdexcept>
#include <string>
#include <vector>

namespace unistore {

// Data centers and partitions are numbered 1..D and 1..N.
using DcId = int32_t;
using PartitionId = int32_t;
using ClientId = int32_t;
using Key = int32_t;
using Value = int64_t;
using Tick = int64_t;

constexpr Value kInitialValue = 0;

/// Transaction identifier: unique across a run.
/// Sequence numbers come from a per-coordinator counter.
struct TxId {
  DcId origin = 0;
  PartitionId coord = 0;
  int64_t seq = 0;

  auto operator<=>(const TxId&) const = default;
  bool valid() const { return origin != 0; }
  std::string str() const {
    return "t" + std::to_string(origin) + "." + std::to_string(coord) + "." +
           std::to_string(seq);
  }
};

/// Lamport timestamp with the issuing client as tie-break; totally ordered.
struct LamportStamp {
  int64_t counter = 0;
  ClientId client = 0;

  auto operator<=>(const LamportStamp&) const = default;
};

inline bool lamport_less(const LamportStamp& a, const LamportStamp& b) {
  return a < b;
}

enum class VecOrder { Equal, Less, Greater, Incomparable };

/// Vector timestamp: one scalar entry per data center plus a strong entry.
/// The strong entry participates in comparisons exactly like DC entries;
/// call sites that predate the strong extension use leq_dc.
class VectorTimestamp {
 public:
  VectorTimestamp() = default;
  explicit VectorTimestamp(int num_dcs) : dc_(num_dcs, 0) {}

  int dims() const { return static_cast<int>(dc_.size()); }

  int64_t at(DcId d) const { return dc_.at(d - 1); }
  int64_t strong() const { return strong_; }

  void set(DcId d, int64_t v) { dc_.at(d - 1) = v; }
  void set_strong(int64_t v) { strong_ = v; }

  void merge(DcId d, int64_t v) {
    auto& e = dc_.at(d - 1);
    if (v > e) e = v;
  }
  void merge_strong(int64_t v) {
    if (v > strong_) strong_ = v;
  }

  bool operator==(const VectorTimestamp&) const = default;

  const std::vector<int64_t>& dc_entries() const { return dc_; }

 private:
  std::vector<int64_t> dc_;
  int64_t strong_ = 0;
};

inline void check_dims(const VectorTimestamp& a, const VectorTimestamp& b) {
  if (a.dims() != b.dims())
    throw std::invalid_argument("vector timestamp dimension mismatch");
}

/// Entrywise <= over all D+1 entries.
inline bool vec_leq(const VectorTimestamp& a, const VectorTimestamp& b) {
  check_dims(a, b);
  for (int i = 0; i < a.dims(); ++i)
    if (a.dc_entries()[i] > b.dc_entries()[i]) return false;
  return a.strong() <= b.strong();
}

/// Entrywise <= over the DC entries only (ignores the strong entry).
inline bool vec_leq_dc(const VectorTimestamp& a, const VectorTimestamp& b) {
  check_dims(a, b);
  for (int i = 0; i < a.dims(); ++i)
    if (a.dc_entries()[i] > b.dc_entries()[i]) return false;
  return true;
}

inline VecOrder vec_compare(const VectorTimestamp& a, const VectorTimestamp& b) {
  bool le = vec_leq(a, b);
  bool ge = vec_leq(b, a);
  if (le && ge) return VecOrder::Equal;
  if (le) return VecOrder::Less;
  if (ge) return VecOrder::Greater;
  return VecOrder::Incomparable;
}

/// Entrywise maximum.
inline VectorTimestamp vec_join(const VectorTimestamp& a, const VectorTimestamp& b) {
  check_dims(a, b);
  VectorTimestamp r = a;
  for (int i = 1; i <= a.dims(); ++i) r.merge(i, b.at(i));
  r.merge_strong(b.strong());
  return r;
}

/// Replica address: partition m at data center d.
struct ReplicaId {
  DcId dc = 0;
  PartitionId partition = 0;

  auto operator<=>(const ReplicaId&) const = default;
  bool valid() const { return dc != 0; }
  std::string str() const {
    return "p" + std::to_string(partition) + "@d" + std::to_string(dc);
  }
};

/// Keys are spread over partitions round-robin.
inline PartitionId partition_of(Key k, int num_partitions) {
  int32_t m = k % num_partitions;
  if (m < 0) m += num_partitions;
  return m + 1;
}

}  // namespace unistore

// Copyright 2026 the unistore-sim authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file or http://www.apache.org/licenses/LICENSE-2.0
#pragma once

#include <map>
#include <optional>
#include <set>
#include <variant>
#include <vector>

#include "unistore/core.hpp"

namespace unistore {

using PartitionWrites = std::map<Key, Value>;          // last write per key wins
using WriteBuffer = std::map<PartitionId, PartitionWrites>;
using ReadSet = std::set<Key>;

enum class Decision { Commit, Abort };
enum class Vote { Commit, Abort };
enum class CertifyMode { Normal, Restoring };

/// A committed causal transaction as shipped between sibling replicas:
/// only the writes for the receiving partition.
struct CausalTxRecord {
  TxId tid;
  PartitionWrites writes;
  VectorTimestamp commit_vec;
  LamportStamp lamport;
};

/// Entry of the per-partition certification state (Paxos value).
struct StrongPrepared {
  TxId tid;
  WriteBuffer wbuff;
  ReadSet rset;
  VectorTimestamp snap_vec;
  Vote vote = Vote::Commit;
  int64_t ts = 0;  // strong prepare timestamp
  LamportStamp lamport;
};

struct StrongDecided {
  TxId tid;
  WriteBuffer wbuff;
  Decision decision = Decision::Commit;
  VectorTimestamp commit_vec;
  LamportStamp lamport;
};

// --- client <-> coordinator ---

struct StartTxReq { ClientId client; VectorTimestamp past; };
struct StartTxResp { ClientId client; TxId tid; VectorTimestamp snap; };
struct DoReadReq { ClientId client; TxId tid; Key key; };
struct DoReadResp {
  ClientId client; TxId tid; Key key; Value value;
  std::optional<LamportStamp> writer;  // nullopt for reads served from wbuff
};
struct DoUpdateReq { ClientId client; TxId tid; Key key; Value value; };
struct DoUpdateResp { ClientId client; TxId tid; };
struct CommitCausalReq { ClientId client; TxId tid; LamportStamp lc; };
struct CommitCausalResp {
  ClientId client; TxId tid; VectorTimestamp commit_vec; bool read_only;
};
struct CommitStrongReq { ClientId client; TxId tid; LamportStamp lc; };
struct CommitStrongResp {
  ClientId client; TxId tid; Decision decision;
  VectorTimestamp commit_vec; LamportStamp lamport;
};
struct UniformBarrierReq { ClientId client; VectorTimestamp vec; };
struct UniformBarrierResp { ClientId client; };
struct AttachReq { ClientId client; VectorTimestamp vec; };
struct AttachResp { ClientId client; };

// --- causal execution and replication ---

struct GetVersion { ReplicaId from; TxId tid; Key key; VectorTimestamp snap; };
struct Version { TxId tid; Key key; Value value; LamportStamp lamport; };
struct Prepare {
  ReplicaId from; TxId tid; PartitionWrites writes; VectorTimestamp snap;
};
struct PrepareAck { TxId tid; int64_t ts; };
struct CommitMsg { TxId tid; VectorTimestamp commit_vec; LamportStamp lamport; };
struct Replicate { DcId origin; std::vector<CausalTxRecord> txs; };
struct HeartbeatMsg { DcId origin; int64_t ts; };
struct KnownVecLocal { PartitionId from; VectorTimestamp vec; };
struct StableVecMsg { DcId from; VectorTimestamp vec; };
struct KnownVecGlobal { DcId from; VectorTimestamp vec; };

// --- strong transaction certification (TCS) ---

struct PrepareStrong {
  ReplicaId from; int64_t rid; CertifyMode mode;
  TxId tid; WriteBuffer wbuff; ReadSet rset;
  VectorTimestamp snap; LamportStamp lamport;
};
struct AlreadyDecided {
  TxId tid; Decision decision; VectorTimestamp commit_vec; LamportStamp lamport;
};
struct UnknownTx { int64_t ballot; int64_t rid; TxId tid; ReplicaId coord; };
struct UnknownTxAck { ReplicaId from; PartitionId partition; int64_t rid; TxId tid; };
struct AcceptMsg {
  int64_t ballot; TxId tid; WriteBuffer wbuff; ReadSet rset;
  VectorTimestamp snap; Vote vote; int64_t ts; ReplicaId coord; LamportStamp lamport;
};
struct AcceptAck {
  ReplicaId from; PartitionId partition; int64_t ballot; TxId tid;
  Vote vote; int64_t ts; LamportStamp lamport;
};
struct DecisionMsg {
  int64_t ballot; TxId tid; Decision decision;
  VectorTimestamp commit_vec; LamportStamp lamport;
};
struct LearnDecision {
  int64_t ballot; TxId tid; Decision decision;
  VectorTimestamp commit_vec; LamportStamp lamport;
};
struct DeliverMsg { int64_t ballot; int64_t ts; };

// --- TCS recovery ---

struct NewLeader { ReplicaId from; int64_t ballot; };
struct NackMsg { ReplicaId from; int64_t ballot; };
struct NewLeaderAck {
  ReplicaId from; int64_t ballot; int64_t cballot;
  std::vector<StrongPrepared> prepared;
  std::vector<StrongDecided> decided;
};
struct NewState {
  ReplicaId from; int64_t ballot;
  std::vector<StrongPrepared> prepared;
  std::vector<StrongDecided> decided;
  int64_t last_delivered;
};
struct NewStateAck { ReplicaId from; int64_t ballot; };

/// Harness-fed leader-election failure detector output for one partition.
struct OmegaChange { PartitionId partition; ReplicaId leader; };

using Message = std::variant<
    StartTxReq, StartTxResp, DoReadReq, DoReadResp, DoUpdateReq, DoUpdateResp,
    CommitCausalReq, CommitCausalResp, CommitStrongReq, CommitStrongResp,
    UniformBarrierReq, UniformBarrierResp, AttachReq, AttachResp,
    GetVersion, Version, Prepare, PrepareAck, CommitMsg,
    Replicate, HeartbeatMsg, KnownVecLocal, StableVecMsg, KnownVecGlobal,
    PrepareStrong, AlreadyDecided, UnknownTx, UnknownTxAck, AcceptMsg, AcceptAck,
    DecisionMsg, LearnDecision, DeliverMsg,
    NewLeader, NackMsg, NewLeaderAck, NewState, NewStateAck, OmegaChange>;

inline const char* decision_str(Decision d) {
  return d == Decision::Commit ? "commit" : "abort";
}

}  // namespace unistore

// Copyright 2026 the unistore-sim authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file or http://www.apache.org/licenses/LICENSE-2.0
#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "unistore/core.hpp"
#include "unistore/messages.hpp"

namespace unistore {

using Json = nlohmann::ordered_json;

inline Json to_json(const VectorTimestamp& v) {
  return Json{{"dc", v.dc_entries()}, {"strong", v.strong()}};
}

inline VectorTimestamp vec_from_json(const Json& j) {
  VectorTimestamp v(static_cast<int>(j.at("dc").size()));
  int i = 1;
  for (const auto& e : j.at("dc")) v.set(i++, e.get<int64_t>());
  v.set_strong(j.at("strong").get<int64_t>());
  return v;
}

inline Json to_json(const LamportStamp& lc) {
  return Json{{"lc", lc.counter}, {"client", lc.client}};
}

inline LamportStamp lamport_from_json(const Json& j) {
  return {j.at("lc").get<int64_t>(), j.at("client").get<ClientId>()};
}

inline Json to_json(const TxId& t) {
  return Json{{"dc", t.origin}, {"coord", t.coord}, {"seq", t.seq}};
}

inline TxId tid_from_json(const Json& j) {
  return {j.at("dc").get<DcId>(), j.at("coord").get<PartitionId>(),
          j.at("seq").get<int64_t>()};
}

/// One run's recorded trace: line-delimited JSON, one event per line,
/// first line a header {version, seed, D, N, f}.
struct Trace {
  std::vector<Json> events;

  void add(Json e) { events.push_back(std::move(e)); }

  std::string dump() const {
    std::string out;
    for (const auto& e : events) {
      out += e.dump();
      out += '\n';
    }
    return out;
  }

  void save(const std::string& path) const {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write trace file: " + path);
    f << dump();
  }

  static Trace parse(std::istream& in) {
    Trace t;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      try {
        t.add(Json::parse(line));
      } catch (const std::exception& e) {
        throw std::runtime_error("trace parse error at line " +
                                 std::to_string(lineno) + ": " + e.what());
      }
    }
    return t;
  }

  static Trace load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open trace file: " + path);
    return parse(f);
  }
};

}  // namespace unistore

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "egrl/errors.hpp"
#include "egrl/hwsim.hpp"
#include "egrl/rng.hpp"

namespace egrl {

// One interaction: the graph is static per workload, so the state is just
// the workload id. Episodes are 1-step, so done is true in every in-scope
// run; the field exists for the general Bellman form.
struct Transition {
  std::string workload_id;
  MappingDecision action;
  double reward = 0.0;
  bool done = true;

  bool operator==(const Transition&) const = default;
};

// Cyclic buffer, oldest-overwritten. Shared by every policy in a run.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 100000) : capacity_(capacity) {
    if (capacity_ == 0) throw ConfigError("replay capacity must be > 0");
  }

  void push(Transition t) {
    if (data_.size() < capacity_) {
      data_.push_back(std::move(t));
    } else {
      data_[head_] = std::move(t);
      head_ = (head_ + 1) % capacity_;
    }
    ++inserted_;
  }

  std::size_t size() const { return data_.size(); }
  std::size_t capacity() const { return capacity_; }
  std::uint64_t inserted() const { return inserted_; }

  // Oldest-first logical order.
  const Transition& at(std::size_t logical) const {
    return data_[(head_ + logical) % data_.size()];
  }

  // Uniform without replacement within a batch; deterministic under seed.
  std::vector<Transition> sample(int batch, std::uint64_t seed) const {
    if (batch < 1 || static_cast<std::size_t>(batch) > data_.size())
      throw std::invalid_argument("cannot sample " + std::to_string(batch) +
                                  " transitions from a buffer of size " +
                                  std::to_string(data_.size()));
    Rng rng(derive_seed(seed, "replay_sample"));
    std::vector<std::size_t> idx(data_.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::vector<Transition> out;
    out.reserve(batch);
    for (int k = 0; k < batch; ++k) {
      const std::size_t j = k + rng.below(idx.size() - k);
      std::swap(idx[k], idx[j]);
      out.push_back(at(idx[k]));
    }
    return out;
  }

  void dump(const std::string& path) const {
    nlohmann::ordered_json j;
    j["schema"] = 1;
    j["capacity"] = capacity_;
    j["inserted"] = inserted_;
    auto& arr = j["transitions"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < data_.size(); ++i) {
      const Transition& t = at(i);
      nlohmann::ordered_json tj;
      tj["workload"] = t.workload_id;
      tj["weight_mem"] = t.action.weight_mem;
      tj["act_mem"] = t.action.act_mem;
      tj["reward"] = t.reward;
      tj["done"] = t.done;
      arr.push_back(std::move(tj));
    }
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open '" + path + "' for writing");
    out << j.dump(1) << "\n";
  }

  static ReplayBuffer restore(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open buffer dump '" + path + "'");
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError(std::string("buffer dump is not valid JSON: ") + e.what());
    }
    if (!j.contains("schema") || j["schema"].get<int>() != 1)
      throw SchemaError("buffer dump schema version must be 1");
    ReplayBuffer b(j["capacity"].get<std::size_t>());
    for (const auto& tj : j["transitions"]) {
      Transition t;
      t.workload_id = tj["workload"].get<std::string>();
      for (const auto& v : tj["weight_mem"]) t.action.weight_mem.push_back(v.get<std::uint8_t>());
      for (const auto& v : tj["act_mem"]) t.action.act_mem.push_back(v.get<std::uint8_t>());
      t.reward = tj["reward"].get<double>();
      t.done = tj["done"].get<bool>();
      b.push(std::move(t));
    }
    b.inserted_ = j["inserted"].get<std::uint64_t>();
    return b;
  }

 private:
  std::size_t capacity_;
  std::vector<Transition> data_;
  std::size_t head_ = 0;  // index of the oldest element once full
  std::uint64_t inserted_ = 0;
};

}  // namespace egrl

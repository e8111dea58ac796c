#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

namespace wsqa {

// Public view of a weight vector: sparse feature-name -> value map with no
// zero entries. Models use interned ids internally and materialize this
// form at the checkpoint boundary.
using FeatureVector = std::map<std::string, double>;

// Interned sparse feature bundle: parallel (id, value) arrays.
struct SparseFeats {
  std::vector<int> ids;
  std::vector<double> vals;
  void add(int id, double v) {
    ids.push_back(id);
    vals.push_back(v);
  }
  std::size_t size() const { return ids.size(); }
};

// String -> dense-id interner. Ids are assigned in first-seen order; all
// persisted artifacts are keyed by name, so id order never leaks outside.
class FeatureInterner {
 public:
  int intern(const std::string& name) {
    auto [it, fresh] = index_.try_emplace(name, static_cast<int>(names_.size()));
    if (fresh) names_.push_back(name);
    return it->second;
  }
  int find(const std::string& name) const {
    auto it = index_.find(name);
    return it == index_.end() ? -1 : it->second;
  }
  const std::string& name(int id) const { return names_[id]; }
  std::size_t size() const { return names_.size(); }

 private:
  std::unordered_map<std::string, int> index_;
  std::vector<std::string> names_;
};

// Dense weight storage indexed by interned id; grows on demand.
class WeightStore {
 public:
  double get(int id) const {
    return id >= 0 && id < static_cast<int>(w_.size()) ? w_[id] : 0.0;
  }
  void add(int id, double delta) {
    if (id >= static_cast<int>(w_.size())) w_.resize(id + 1, 0.0);
    w_[id] += delta;
  }
  void set(int id, double v) {
    if (id >= static_cast<int>(w_.size())) w_.resize(id + 1, 0.0);
    w_[id] = v;
  }
  double dot(const SparseFeats& f) const {
    double s = 0.0;
    for (std::size_t i = 0; i < f.ids.size(); ++i) s += get(f.ids[i]) * f.vals[i];
    return s;
  }
  std::size_t size() const { return w_.size(); }
  void clear() { w_.assign(w_.size(), 0.0); }

 private:
  std::vector<double> w_;
};

}  // namespace wsqa

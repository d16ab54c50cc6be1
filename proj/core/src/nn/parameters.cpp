#include "hardc/nn/parameters.hpp"

#include <cmath>
#include <set>

#include "hardc/error.hpp"

namespace hardc::nn {

Parameter& ParameterSet::add(const std::string& name, Tensor value, bool trainable) {
  if (index_.count(name)) throw SpecError("duplicate parameter name " + name);
  index_[name] = params_.size();
  params_.push_back(std::make_unique<Parameter>(name, std::move(value), trainable));
  return *params_.back();
}

Parameter& ParameterSet::add_uniform(const std::string& name, Shape shape, std::size_t fan_in, std::mt19937_64& rng) {
  Tensor t(std::move(shape));
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = dist(rng);
  return add(name, std::move(t));
}

Parameter& ParameterSet::get(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw SpecError("no parameter named " + name);
  return *params_[it->second];
}

const Parameter& ParameterSet::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw SpecError("no parameter named " + name);
  return *params_[it->second];
}

std::vector<Parameter*> ParameterSet::trainable() {
  std::vector<Parameter*> out;
  for (auto& p : params_)
    if (p->trainable) out.push_back(p.get());
  return out;
}

std::vector<const Parameter*> ParameterSet::all() const {
  std::vector<const Parameter*> out;
  for (const auto& p : params_) out.push_back(p.get());
  return out;
}

void ParameterSet::zero_grad() {
  for (auto& p : params_) p->zero_grad();
}

NamedTensors ParameterSet::state() const {
  NamedTensors out;
  for (const auto& p : params_) out.emplace_back(p->name, p->value);
  return out;
}

void ParameterSet::load(const NamedTensors& tensors) {
  std::set<std::string> seen;
  for (const auto& [name, t] : tensors) {
    if (!seen.insert(name).second) throw FormatError("tensor " + name + " appears twice");
    auto it = index_.find(name);
    if (it == index_.end()) throw FormatError("unexpected tensor " + name);
    Parameter& p = *params_[it->second];
    if (p.value.shape() != t.shape())
      throw FormatError("tensor " + name + " has shape " + shape_string(t.shape()) + ", expected " +
                        shape_string(p.value.shape()));
  }
  if (seen.size() != params_.size()) {
    for (const auto& p : params_)
      if (!seen.count(p->name)) throw FormatError("missing tensor " + p->name);
  }
  for (const auto& [name, t] : tensors) get(name).value = t;
}

}  // namespace hardc::nn

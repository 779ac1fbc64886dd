#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "floordiff/tensor.hpp"

namespace floordiff::num {

// Ordered collection of named tensors. Order is creation order and defines
// the layout of gradients, optimizer moments and checkpoints.
class ParamStore {
 public:
  int add(std::string name, Tensor value) {
    for (const auto& e : entries_) {
      if (e.name == name) throw std::invalid_argument("ParamStore: duplicate name " + name);
    }
    entries_.push_back({std::move(name), std::move(value)});
    return static_cast<int>(entries_.size()) - 1;
  }

  std::size_t count() const { return entries_.size(); }

  const std::string& name(std::size_t i) const { return entries_[i].name; }
  Tensor& tensor(std::size_t i) { return entries_[i].value; }
  const Tensor& tensor(std::size_t i) const { return entries_[i].value; }

  int index_of(std::string_view name) const {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      if (entries_[i].name == name) return static_cast<int>(i);
    }
    return -1;
  }

  Tensor& at(std::string_view name) {
    const int i = index_of(name);
    if (i < 0) throw std::out_of_range("ParamStore: no parameter named " + std::string(name));
    return entries_[static_cast<std::size_t>(i)].value;
  }

  const Tensor& at(std::string_view name) const {
    const int i = index_of(name);
    if (i < 0) throw std::out_of_range("ParamStore: no parameter named " + std::string(name));
    return entries_[static_cast<std::size_t>(i)].value;
  }

  std::int64_t total_size() const {
    std::int64_t n = 0;
    for (const auto& e : entries_) n += e.value.size();
    return n;
  }

 private:
  struct Entry {
    std::string name;
    Tensor value;
  };
  std::vector<Entry> entries_;
};

}  // namespace floordiff::num

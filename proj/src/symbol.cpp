#include "delcheck/symbol.hpp"

#include <cctype>
#include <deque>
#include <mutex>
#include <unordered_map>

namespace delcheck::detail {

namespace {

struct Table {
  std::mutex mutex;
  std::deque<std::string> names;  // deque keeps references stable
  std::unordered_map<std::string_view, std::uint32_t> index;

  Table() {
    names.emplace_back();
    index.emplace(names.back(), 0);
  }
};

Table& table(int tag) {
  static Table tables[2];
  return tables[tag];
}

}  // namespace

std::uint32_t intern_name(int tag, std::string_view name) {
  Table& t = table(tag);
  std::lock_guard lock(t.mutex);
  if (auto it = t.index.find(name); it != t.index.end()) return it->second;
  auto id = static_cast<std::uint32_t>(t.names.size());
  t.names.emplace_back(name);
  t.index.emplace(t.names.back(), id);
  return id;
}

const std::string& lookup_name(int tag, std::uint32_t id) {
  Table& t = table(tag);
  std::lock_guard lock(t.mutex);
  return t.names[id];
}

}  // namespace delcheck::detail

namespace delcheck {

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  auto head = static_cast<unsigned char>(s.front());
  if (!std::isalpha(head) && head != '_') return false;
  for (char c : s) {
    auto u = static_cast<unsigned char>(c);
    if (!std::isalnum(u) && u != '_' && u != '\'' && u != '.') return false;
  }
  return true;
}

}  // namespace delcheck

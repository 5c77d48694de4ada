#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

namespace delcheck {

namespace detail {
std::uint32_t intern_name(int table, std::string_view name);
const std::string& lookup_name(int table, std::uint32_t id);
}  // namespace detail

/// Interned identifier. Each Tag gets its own table, so agents and
/// propositions with the same spelling stay distinct types.
template <int Tag>
class Name {
 public:
  Name() = default;
  explicit Name(std::string_view name) : id_(detail::intern_name(Tag, name)) {}

  const std::string& str() const { return detail::lookup_name(Tag, id_); }
  std::uint32_t id() const { return id_; }

  // Ordered by interning order, which is cheap and deterministic for a
  // deterministic program. Use by_spelling() where output order matters.
  friend auto operator<=>(Name a, Name b) = default;

 private:
  std::uint32_t id_ = 0;
};

template <int Tag>
bool by_spelling(Name<Tag> a, Name<Tag> b) {
  return a.str() < b.str();
}

using Agent = Name<0>;
using Prop = Name<1>;

bool is_identifier(std::string_view s);

}  // namespace delcheck

template <int Tag>
struct std::hash<delcheck::Name<Tag>> {
  std::size_t operator()(delcheck::Name<Tag> n) const noexcept { return n.id(); }
};

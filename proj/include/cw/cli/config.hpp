#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cw/alpha_law.hpp"
#include "cw/cooling.hpp"

namespace cw::cli {

/// Parsed right-hand side of a config entry.
///
///   value   := expr | list | tuple | call | named | word
///   list    := '[' value (',' value)* ']'
///   tuple   := '(' value (',' value)+ ')'
///   call    := ident '(' [arg (',' arg)*] ')'     arg := [ident '='] value
///   named   := ident '=' value                    (e.g. atoms=[...], blocks=[...])
///   expr    := arithmetic over numbers with + - * / ^, pi, e, ln, log, exp, sqrt
struct Value {
  enum class Kind { number, list, call, named, word };
  Kind kind = Kind::number;
  double number = 0.0;
  std::string name;                                      // call, named, word
  std::vector<std::pair<std::string, Value>> items;      // list/call args (key empty when positional)
  int column = 0;                                        // 1-based column inside the entry's line
};

/// Parses a value; `line` and `column0` locate the text for error messages.
Value parse_value(std::string_view text, int line = 0, int column0 = 1);

/// Flat key-value experiment config.
///
///   # comment
///   seed = 42
///   alpha = atoms=[(1/3, 1/2), (2/3, 1/2)]
///   [simulate]
///   n = 10^5                     # stored as simulate.n
///
/// Lookups for `key` try `<section>.key` for the active section first, then `key`.
/// `--set key=value` overrides replace or add entries.
class Config {
 public:
  static Config parse(std::string_view text);
  static Config load(const std::filesystem::path& path);

  /// Applies `key=value`. Throws ConfigError on a malformed assignment.
  void apply_override(std::string_view assignment);
  void set_section(std::string section) { section_ = std::move(section); }

  bool has(std::string_view key) const;
  Value value(std::string_view key) const;

  double number(std::string_view key) const;
  double number(std::string_view key, double fallback) const;
  std::int64_t integer(std::string_view key) const;
  std::int64_t integer(std::string_view key, std::int64_t fallback) const;
  bool boolean(std::string_view key, bool fallback) const;
  std::string word(std::string_view key, std::string_view fallback) const;
  std::vector<double> numbers(std::string_view key) const;
  std::vector<std::int64_t> integers(std::string_view key) const;
  /// Mandatory: decimal or 0x-prefixed 64-bit integer.
  std::uint64_t seed() const;

  AlphaLaw alpha(std::string_view key = "alpha") const;
  std::optional<CoolingMap> cooling(std::string_view key = "cooling") const;

  /// Every entry after overrides, keyed by its full name, in sorted order.
  std::map<std::string, std::string> resolved() const;

 private:
  struct Entry {
    std::string text;
    int line = 0;
    int column = 0;  // column of the first value character
  };
  const std::pair<const std::string, Entry>* find(std::string_view key) const;
  const std::pair<const std::string, Entry>& require(std::string_view key) const;

  std::map<std::string, Entry> entries_;
  std::string section_;
};

/// AlphaLaw from `atoms=[(w, p), ...]`, a bare atom list, `recurrent(x=..)`,
/// `s_transient(x=.., s=..)` or `delta(p)`.
AlphaLaw alpha_from_value(const Value& v, int line);
/// CoolingMap from `polynomial(B=..,beta=..)`, `exponential(c=..)`, `doubleexp(c=..)`,
/// `faster(c=..)`, `explicit([..])` or `blocks=[(n, count), ...]`.
CoolingMap cooling_from_value(const Value& v, int line);

}  // namespace cw::cli

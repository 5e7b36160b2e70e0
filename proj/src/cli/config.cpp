#include "cw/cli/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <sstream>

#include "cw/error.hpp"

namespace cw::cli {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool key_char(char c) { return ident_char(c) || c == '.' || c == '-'; }

class Parser {
 public:
  Parser(std::string_view text, int line, int column0) : text_(text), line_(line), column0_(column0) {}

  Value parse_all() {
    Value v = parse_value();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return v;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError(what, line_, column0_ + static_cast<int>(pos_));
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }
  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }
  int column() const { return column0_ + static_cast<int>(pos_); }

  std::string identifier() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && ident_char(text_[pos_])) ++pos_;
    return std::string(text_.substr(start, pos_ - start));
  }

  // Looks ahead for `ident =` (but not `==`).
  bool at_assignment() {
    skip_ws();
    std::size_t p = pos_;
    if (p >= text_.size() || !ident_start(text_[p])) return false;
    while (p < text_.size() && ident_char(text_[p])) ++p;
    while (p < text_.size() && std::isspace(static_cast<unsigned char>(text_[p]))) ++p;
    return p < text_.size() && text_[p] == '=';
  }

  Value parse_value() {
    const char c = peek();
    const int col = column();
    if (c == '[') {
      ++pos_;
      Value v;
      v.kind = Value::Kind::list;
      v.column = col;
      if (peek() == ']') {
        ++pos_;
        return v;
      }
      while (true) {
        v.items.emplace_back("", parse_value());
        const char d = peek();
        if (d == ',') {
          ++pos_;
          continue;
        }
        if (d == ']') {
          ++pos_;
          return v;
        }
        fail("expected ',' or ']'");
      }
    }
    if (at_assignment()) {
      Value v;
      v.kind = Value::Kind::named;
      v.column = col;
      v.name = identifier();
      expect('=');
      v.items.emplace_back("", parse_value());
      return v;
    }
    // Either an arithmetic expression, a tuple, a call or a bare word.
    return parse_sum();
  }

  static bool is_math_function(const std::string& name) {
    return name == "ln" || name == "log" || name == "exp" || name == "sqrt";
  }

  Value number(double x, int col) {
    Value v;
    v.number = x;
    v.column = col;
    return v;
  }

  double require_number(const Value& v) {
    if (v.kind != Value::Kind::number) {
      pos_ = static_cast<std::size_t>(v.column - column0_);
      fail("expected a number");
    }
    return v.number;
  }

  Value parse_sum() {
    Value lhs = parse_product();
    while (true) {
      const char c = peek();
      if (c != '+' && c != '-') return lhs;
      ++pos_;
      const double a = require_number(lhs);
      const double b = require_number(parse_product());
      lhs = number(c == '+' ? a + b : a - b, lhs.column);
    }
  }

  Value parse_product() {
    Value lhs = parse_unary();
    while (true) {
      const char c = peek();
      if (c != '*' && c != '/') return lhs;
      ++pos_;
      const double a = require_number(lhs);
      const double b = require_number(parse_unary());
      if (c == '/' && b == 0.0) fail("division by zero");
      lhs = number(c == '*' ? a * b : a / b, lhs.column);
    }
  }

  // Unary sign binds looser than '^', so -2^2 is -4.
  Value parse_unary() {
    const char c = peek();
    if (c == '-' || c == '+') {
      const int col = column();
      ++pos_;
      const double x = require_number(parse_unary());
      return number(c == '-' ? -x : x, col);
    }
    return parse_power();
  }

  Value parse_power() {
    Value base = parse_atom();
    if (peek() == '^') {
      ++pos_;
      const double a = require_number(base);
      const double b = require_number(parse_unary());  // right associative
      return number(std::pow(a, b), base.column);
    }
    return base;
  }

  Value parse_atom() {
    const char c = peek();
    const int col = column();
    if (c == '(') {
      ++pos_;
      Value first = parse_value();
      if (peek() == ')') {
        ++pos_;
        return first;
      }
      Value tuple;
      tuple.kind = Value::Kind::list;
      tuple.column = col;
      tuple.items.emplace_back("", std::move(first));
      while (peek() == ',') {
        ++pos_;
        tuple.items.emplace_back("", parse_value());
      }
      expect(')');
      return tuple;
    }
    if (c == '0' && pos_ + 1 < text_.size() && (text_[pos_ + 1] == 'x' || text_[pos_ + 1] == 'X')) {
      const char* begin = text_.data() + pos_ + 2;
      std::uint64_t x = 0;
      const auto [ptr, ec] = std::from_chars(begin, text_.data() + text_.size(), x, 16);
      if (ec != std::errc()) fail("malformed hex integer");
      pos_ = static_cast<std::size_t>(ptr - text_.data());
      return number(static_cast<double>(x), col);
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = text_.data() + pos_;
      double x = 0.0;
      const auto [ptr, ec] = std::from_chars(begin, text_.data() + text_.size(), x);
      if (ec != std::errc()) fail("malformed number");
      pos_ += static_cast<std::size_t>(ptr - begin);
      return number(x, col);
    }
    if (ident_start(c)) {
      const std::string name = identifier();
      if (peek() == '(') {
        ++pos_;
        if (is_math_function(name)) {
          const double x = require_number(parse_sum());
          expect(')');
          if (name == "exp") return number(std::exp(x), col);
          if (x < 0.0 || (x == 0.0 && name != "sqrt")) fail(name + " of a non-positive number");
          return number(name == "sqrt" ? std::sqrt(x) : std::log(x), col);
        }
        Value call;
        call.kind = Value::Kind::call;
        call.name = name;
        call.column = col;
        if (peek() == ')') {
          ++pos_;
          return call;
        }
        while (true) {
          std::string key;
          if (at_assignment()) {
            key = identifier();
            expect('=');
          }
          call.items.emplace_back(key, parse_value());
          const char d = peek();
          if (d == ',') {
            ++pos_;
            continue;
          }
          if (d == ')') {
            ++pos_;
            return call;
          }
          fail("expected ',' or ')'");
        }
      }
      if (name == "pi") return number(std::numbers::pi, col);
      if (name == "e") return number(std::numbers::e, col);
      Value w;
      w.kind = Value::Kind::word;
      w.name = name;
      w.column = col;
      return w;
    }
    if (c == '\0') fail("missing value");
    fail("unexpected '" + std::string(1, c) + "'");
  }

  std::string_view text_;
  int line_;
  int column0_;
  std::size_t pos_ = 0;
};

[[noreturn]] void value_error(const std::string& what, const Value& v, int line) {
  throw ConfigError(what, line, v.column);
}

double as_number(const Value& v, int line) {
  if (v.kind != Value::Kind::number) value_error("expected a number", v, line);
  return v.number;
}

std::int64_t as_integer(const Value& v, int line) {
  const double x = as_number(v, line);
  if (!(std::abs(x) < 9.2e18) || std::floor(x) != x) value_error("expected an integer", v, line);
  return static_cast<std::int64_t>(x);
}

const Value& call_arg(const Value& call, std::string_view key, std::size_t position, int line) {
  for (const auto& [k, v] : call.items)
    if (k == key) return v;
  if (position < call.items.size() && call.items[position].first.empty()) return call.items[position].second;
  value_error(call.name + "(...) needs argument '" + std::string(key) + "'", call, line);
}

}  // namespace

Value parse_value(std::string_view text, int line, int column0) {
  return Parser(text, line, column0).parse_all();
}

AlphaLaw alpha_from_value(const Value& v, int line) {
  try {
    if (v.kind == Value::Kind::named) {
      if (v.name != "atoms") value_error("unknown alpha form '" + v.name + "='", v, line);
      return alpha_from_value(v.items.front().second, line);
    }
    if (v.kind == Value::Kind::list) {
      std::vector<Atom> atoms;
      for (const auto& [_, item] : v.items) {
        if (item.kind != Value::Kind::list || item.items.size() != 2)
          value_error("atoms must be (omega, weight) pairs", item, line);
        atoms.push_back({as_number(item.items[0].second, line), as_number(item.items[1].second, line)});
      }
      if (atoms.empty()) value_error("alpha needs at least one atom", v, line);
      return AlphaLaw(std::move(atoms));
    }
    if (v.kind == Value::Kind::call) {
      if (v.name == "recurrent") return AlphaLaw::recurrent_family(as_number(call_arg(v, "x", 0, line), line));
      if (v.name == "s_transient")
        return AlphaLaw::s_transient_family(as_number(call_arg(v, "x", 0, line), line),
                                            as_number(call_arg(v, "s", 1, line), line));
      if (v.name == "delta") return AlphaLaw({{as_number(call_arg(v, "p", 0, line), line), 1.0}});
      value_error("unknown alpha form '" + v.name + "(...)'", v, line);
    }
    value_error("expected an alpha law such as atoms=[(1/3,1/2),(2/3,1/2)]", v, line);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("invalid alpha: ") + e.what(), line, v.column);
  }
}

CoolingMap cooling_from_value(const Value& v, int line) {
  try {
    if (v.kind == Value::Kind::named && v.name == "blocks") {
      const Value& list = v.items.front().second;
      if (list.kind != Value::Kind::list) value_error("blocks needs a list of (length, count)", list, line);
      std::vector<Block> blocks;
      for (const auto& [_, item] : list.items) {
        if (item.kind != Value::Kind::list || item.items.size() != 2)
          value_error("blocks must be (length, count) pairs", item, line);
        blocks.push_back({as_integer(item.items[0].second, line), as_integer(item.items[1].second, line)});
      }
      return CoolingMap::repeated_blocks(std::move(blocks));
    }
    if (v.kind == Value::Kind::call) {
      if (v.name == "polynomial")
        return CoolingMap::polynomial(as_number(call_arg(v, "B", 0, line), line),
                                      as_number(call_arg(v, "beta", 1, line), line));
      if (v.name == "exponential") return CoolingMap::exponential(as_number(call_arg(v, "c", 0, line), line));
      if (v.name == "doubleexp")
        return CoolingMap::double_exponential(as_number(call_arg(v, "c", 0, line), line));
      if (v.name == "faster") return CoolingMap::faster(as_number(call_arg(v, "c", 0, line), line));
      if (v.name == "explicit") {
        const Value& list = call_arg(v, "T", 0, line);
        if (list.kind != Value::Kind::list) value_error("explicit needs a list of increments", list, line);
        std::vector<std::int64_t> inc;
        for (const auto& [_, item] : list.items) inc.push_back(as_integer(item, line));
        return CoolingMap::explicit_increments(std::move(inc));
      }
      value_error("unknown cooling family '" + v.name + "'", v, line);
    }
    value_error("expected a cooling map such as polynomial(B=1,beta=2)", v, line);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("invalid cooling: ") + e.what(), line, v.column);
  }
}

Config Config::parse(std::string_view text) {
  Config config;
  std::string section;
  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find('\n', start), text.size());
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const std::string_view body = trim(line);
    if (body.empty()) {
      if (end == text.size()) break;
      continue;
    }
    const int indent = static_cast<int>(body.data() - line.data()) + 1;
    if (body.front() == '[') {
      if (body.back() != ']')
        throw ConfigError("section header needs a closing ']'", line_no, indent + static_cast<int>(body.size()));
      section = std::string(trim(body.substr(1, body.size() - 2)));
      if (section.empty()) throw ConfigError("empty section name", line_no, indent);
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) throw ConfigError("expected 'key = value'", line_no, indent);
    const std::string_view key = trim(body.substr(0, eq));
    if (key.empty() || !ident_start(key.front()))
      throw ConfigError("malformed key", line_no, indent);
    for (char c : key)
      if (!key_char(c)) throw ConfigError("malformed key '" + std::string(key) + "'", line_no, indent);
    std::string_view rest = body.substr(eq + 1);
    const std::string_view value = trim(rest);
    if (value.empty()) throw ConfigError("missing value for '" + std::string(key) + "'", line_no, indent + static_cast<int>(eq) + 1);
    const int column = static_cast<int>(value.data() - line.data()) + 1;
    // Validate the syntax up front so errors point at the file, not at first use.
    parse_value(value, line_no, column);
    const std::string full = section.empty() ? std::string(key) : section + "." + std::string(key);
    config.entries_[full] = Entry{std::string(value), line_no, column};
    if (end == text.size()) break;
  }
  return config;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

void Config::apply_override(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) throw ConfigError("--set expects key=value, got '" + std::string(assignment) + "'");
  const std::string key(trim(assignment.substr(0, eq)));
  const std::string_view value = trim(assignment.substr(eq + 1));
  if (key.empty() || value.empty()) throw ConfigError("--set expects key=value, got '" + std::string(assignment) + "'");
  try {
    parse_value(value, 0, 1);
  } catch (const ConfigError& e) {
    throw ConfigError("--set " + key + ": " + e.what());
  }
  entries_[key] = Entry{std::string(value), 0, 1};
}

const std::pair<const std::string, Config::Entry>* Config::find(std::string_view key) const {
  if (!section_.empty()) {
    const auto it = entries_.find(section_ + "." + std::string(key));
    if (it != entries_.end()) return &*it;
  }
  const auto it = entries_.find(std::string(key));
  return it == entries_.end() ? nullptr : &*it;
}

const std::pair<const std::string, Config::Entry>& Config::require(std::string_view key) const {
  const auto* e = find(key);
  if (!e) throw ConfigError("missing required key '" + std::string(key) + "'");
  return *e;
}

bool Config::has(std::string_view key) const { return find(key) != nullptr; }

Value Config::value(std::string_view key) const {
  const auto& [name, e] = require(key);
  return parse_value(e.text, e.line, e.column);
}

double Config::number(std::string_view key) const {
  const auto& e = require(key).second;
  return as_number(parse_value(e.text, e.line, e.column), e.line);
}

double Config::number(std::string_view key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

std::int64_t Config::integer(std::string_view key) const {
  const auto& e = require(key).second;
  return as_integer(parse_value(e.text, e.line, e.column), e.line);
}

std::int64_t Config::integer(std::string_view key, std::int64_t fallback) const {
  return has(key) ? integer(key) : fallback;
}

bool Config::boolean(std::string_view key, bool fallback) const {
  if (!has(key)) return fallback;
  const auto& e = require(key).second;
  const Value v = parse_value(e.text, e.line, e.column);
  if (v.kind == Value::Kind::word) {
    if (v.name == "true" || v.name == "yes" || v.name == "on") return true;
    if (v.name == "false" || v.name == "no" || v.name == "off") return false;
  }
  if (v.kind == Value::Kind::number && (v.number == 0.0 || v.number == 1.0)) return v.number == 1.0;
  throw ConfigError("expected true or false for '" + std::string(key) + "'", e.line, e.column);
}

std::string Config::word(std::string_view key, std::string_view fallback) const {
  if (!has(key)) return std::string(fallback);
  const auto& e = require(key).second;
  const Value v = parse_value(e.text, e.line, e.column);
  if (v.kind != Value::Kind::word) throw ConfigError("expected a word for '" + std::string(key) + "'", e.line, e.column);
  return v.name;
}

std::vector<double> Config::numbers(std::string_view key) const {
  const auto& e = require(key).second;
  const Value v = parse_value(e.text, e.line, e.column);
  std::vector<double> out;
  if (v.kind == Value::Kind::number) return {v.number};
  if (v.kind != Value::Kind::list) throw ConfigError("expected a list for '" + std::string(key) + "'", e.line, e.column);
  for (const auto& [_, item] : v.items) out.push_back(as_number(item, e.line));
  return out;
}

std::vector<std::int64_t> Config::integers(std::string_view key) const {
  const auto& e = require(key).second;
  const Value v = parse_value(e.text, e.line, e.column);
  std::vector<std::int64_t> out;
  if (v.kind == Value::Kind::number) return {as_integer(v, e.line)};
  if (v.kind != Value::Kind::list) throw ConfigError("expected a list for '" + std::string(key) + "'", e.line, e.column);
  for (const auto& [_, item] : v.items) out.push_back(as_integer(item, e.line));
  return out;
}

std::uint64_t Config::seed() const {
  const auto* found = find("seed");
  if (!found) throw ConfigError("missing required key 'seed' (there is no clock-based default)");
  const Entry& e = found->second;
  std::string_view s = e.text;
  int base = 10;
  if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
    s.remove_prefix(2);
    base = 16;
  }
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out, base);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ConfigError("seed must be a decimal or 0x-prefixed 64-bit integer", e.line, e.column);
  return out;
}

AlphaLaw Config::alpha(std::string_view key) const {
  const auto& e = require(key).second;
  return alpha_from_value(parse_value(e.text, e.line, e.column), e.line);
}

std::optional<CoolingMap> Config::cooling(std::string_view key) const {
  if (!has(key)) return std::nullopt;
  const auto& e = require(key).second;
  const Value v = parse_value(e.text, e.line, e.column);
  if (v.kind == Value::Kind::word && v.name == "none") return std::nullopt;
  return cooling_from_value(v, e.line);
}

std::map<std::string, std::string> Config::resolved() const {
  std::map<std::string, std::string> out;
  for (const auto& [k, e] : entries_) out[k] = e.text;
  return out;
}

}  // namespace cw::cli

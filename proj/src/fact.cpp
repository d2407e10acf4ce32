#include "mission/fact.hpp"

#include <charconv>

#include "mission/errors.hpp"
#include "mission/util.hpp"

namespace mission {

bool valid_namespace(const std::string& ns) {
  return ns == "ex" || ns == "prov" || ns == "time" || ns == "geo";
}

const char* literal_kind_name(LiteralKind k) {
  switch (k) {
    case LiteralKind::String: return "string";
    case LiteralKind::Int: return "int";
    case LiteralKind::Real: return "real";
    case LiteralKind::DateTime: return "datetime";
    case LiteralKind::Wkt: return "wkt";
    case LiteralKind::Json: return "json";
  }
  return "?";
}

Literal Literal::str(std::string s) {
  return {LiteralKind::String, std::move(s)};
}
Literal Literal::integer(std::int64_t v) {
  return {LiteralKind::Int, std::to_string(v)};
}
Literal Literal::real(double v) {
  return {LiteralKind::Real, format_double(v)};
}
Literal Literal::datetime(std::string iso8601) {
  return {LiteralKind::DateTime, std::move(iso8601)};
}
Literal Literal::wkt(std::string text) {
  return {LiteralKind::Wkt, std::move(text)};
}
Literal Literal::json(std::string text) {
  return {LiteralKind::Json, std::move(text)};
}

std::int64_t Literal::as_int() const {
  if (kind != LiteralKind::Int)
    throw contract_error("literal is not an int: " + lexical);
  std::int64_t v = 0;
  auto res = std::from_chars(lexical.data(), lexical.data() + lexical.size(), v);
  if (res.ec != std::errc() || res.ptr != lexical.data() + lexical.size())
    throw contract_error("malformed int literal: " + lexical);
  return v;
}

double Literal::as_real() const {
  if (kind == LiteralKind::Int) return static_cast<double>(as_int());
  if (kind != LiteralKind::Real)
    throw contract_error("literal is not a real: " + lexical);
  double v = 0;
  auto res = std::from_chars(lexical.data(), lexical.data() + lexical.size(), v);
  if (res.ec != std::errc() || res.ptr != lexical.data() + lexical.size())
    throw contract_error("malformed real literal: " + lexical);
  return v;
}

std::string object_key(const Object& o) {
  if (is_entity(o)) return "e:" + as_entity(o).qualified();
  const Literal& lit = as_literal(o);
  return std::string("l:") + literal_kind_name(lit.kind) + ":" + lit.lexical;
}

Fact fact(EntityId s, EntityId p, Object o) {
  return {std::move(s), std::move(p), std::move(o)};
}

namespace {

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    switch (ch) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      default: out += ch;
    }
  }
  out += '"';
  return out;
}

}  // namespace

std::string format_object(const Object& o) {
  if (is_entity(o)) return as_entity(o).qualified();
  const Literal& lit = as_literal(o);
  std::string out = quote(lit.lexical);
  if (lit.kind != LiteralKind::String) {
    out += "^^";
    out += literal_kind_name(lit.kind);
  }
  return out;
}

std::string format_fact(const Fact& f) {
  return f.subject.qualified() + " " + f.predicate.qualified() + " " +
         format_object(f.object);
}

namespace {

struct LineCursor {
  const std::string& s;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
  }
  bool done() {
    skip_ws();
    return pos >= s.size();
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw validation_error("fact parse error: " + what);
  }

  EntityId entity_token() {
    skip_ws();
    std::size_t start = pos;
    while (pos < s.size() && s[pos] != ' ' && s[pos] != '\t') ++pos;
    std::string tok = s.substr(start, pos - start);
    std::size_t colon = tok.find(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 >= tok.size())
      fail("expected ns:local identifier, got '" + tok + "'");
    EntityId id{tok.substr(0, colon), tok.substr(colon + 1)};
    if (!valid_namespace(id.ns))
      fail("unknown namespace '" + id.ns + "' in '" + tok + "'");
    return id;
  }

  Object object_token() {
    skip_ws();
    if (pos >= s.size()) fail("missing object");
    if (s[pos] != '"') return entity_token();
    ++pos;
    std::string text;
    for (;;) {
      if (pos >= s.size()) fail("unterminated string literal");
      char ch = s[pos++];
      if (ch == '"') break;
      if (ch == '\\') {
        if (pos >= s.size()) fail("dangling escape");
        char esc = s[pos++];
        if (esc == 'n')
          text += '\n';
        else if (esc == '"' || esc == '\\')
          text += esc;
        else
          fail(std::string("unknown escape \\") + esc);
      } else {
        text += ch;
      }
    }
    LiteralKind kind = LiteralKind::String;
    if (pos + 1 < s.size() && s[pos] == '^' && s[pos + 1] == '^') {
      pos += 2;
      std::size_t start = pos;
      while (pos < s.size() && s[pos] != ' ' && s[pos] != '\t') ++pos;
      std::string suffix = s.substr(start, pos - start);
      if (suffix == "int")
        kind = LiteralKind::Int;
      else if (suffix == "real")
        kind = LiteralKind::Real;
      else if (suffix == "datetime")
        kind = LiteralKind::DateTime;
      else if (suffix == "wkt")
        kind = LiteralKind::Wkt;
      else if (suffix == "json")
        kind = LiteralKind::Json;
      else if (suffix == "string")
        kind = LiteralKind::String;
      else
        fail("unknown literal suffix ^^" + suffix);
    }
    // Re-canonicalize numerics so parse(format(x)) == x structurally.
    if (kind == LiteralKind::Int) {
      Literal lit{kind, text};
      return Literal::integer(lit.as_int());
    }
    if (kind == LiteralKind::Real) {
      Literal lit{kind, text};
      return Literal::real(lit.as_real());
    }
    return Literal{kind, text};
  }
};

}  // namespace

std::optional<FactLine> parse_fact_line(const std::string& line) {
  LineCursor cur{line};
  if (cur.done()) return std::nullopt;
  if (line[cur.pos] == '#') return std::nullopt;
  FactLine out;
  if (line[cur.pos] == '-' && cur.pos + 1 < line.size() &&
      (line[cur.pos + 1] == ' ' || line[cur.pos + 1] == '\t')) {
    out.retract = true;
    cur.pos += 2;
  }
  out.fact.subject = cur.entity_token();
  if (cur.done()) cur.fail("missing predicate");
  out.fact.predicate = cur.entity_token();
  out.fact.object = cur.object_token();
  if (!cur.done()) cur.fail("trailing input after object");
  return out;
}

std::vector<FactLine> parse_fact_lines(const std::string& text) {
  std::vector<FactLine> out;
  std::size_t line_no = 0, pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    std::string line = text.substr(
        pos, eol == std::string::npos ? std::string::npos : eol - pos);
    ++line_no;
    try {
      if (auto fl = parse_fact_line(line)) out.push_back(std::move(*fl));
    } catch (const MissionError& e) {
      throw validation_error("line " + std::to_string(line_no) + ": " +
                             e.what());
    }
    if (eol == std::string::npos) break;
    pos = eol + 1;
  }
  return out;
}

}  // namespace mission

#include "shadow/query/parser.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

namespace shadow::query {

namespace {

enum class Tok {
  Ident,     // bare identifier
  KindRef,   // Perspective:Kind
  String,    // "..."
  WidLit,    // #123
  Eq, Ne, Lt, Le, Gt, Ge,
  LParen, RParen, Comma, Concat, MapsTo,
  // keywords
  KwSelect, KwProject, KwInto, KwUsing, KwCombine, KwJoin, KwStrong, KwWeak,
  KwForward, KwReverse, KwKey, KwUnion, KwDiff, KwIntersect, KwWhere,
  KwAnd, KwOr, KwNot, KwAll, KwSelf, KwWith, KwWithout, KwDerived, KwFrom,
  KwIncludedIn, KwIncludes, KwSameAs,
  End,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  std::uint64_t number = 0;
  std::size_t line = 1;
  std::size_t column = 1;
};

const std::map<std::string, Tok>& keywords() {
  static const std::map<std::string, Tok> kw = {
      {"SELECT", Tok::KwSelect},   {"PROJECT", Tok::KwProject},
      {"INTO", Tok::KwInto},       {"USING", Tok::KwUsing},
      {"COMBINE", Tok::KwCombine}, {"JOIN", Tok::KwJoin},
      {"STRONG", Tok::KwStrong},   {"WEAK", Tok::KwWeak},
      {"FORWARD", Tok::KwForward}, {"REVERSE", Tok::KwReverse},
      {"KEY", Tok::KwKey},         {"UNION", Tok::KwUnion},
      {"DIFF", Tok::KwDiff},       {"INTERSECT", Tok::KwIntersect},
      {"WHERE", Tok::KwWhere},     {"AND", Tok::KwAnd},
      {"OR", Tok::KwOr},           {"NOT", Tok::KwNot},
      {"ALL", Tok::KwAll},         {"SELF", Tok::KwSelf},
      {"WITH", Tok::KwWith},       {"WITHOUT", Tok::KwWithout},
      {"DERIVED", Tok::KwDerived}, {"FROM", Tok::KwFrom},
      {"INCLUDED_IN", Tok::KwIncludedIn},
      {"INCLUDES", Tok::KwIncludes},
      {"SAME_AS", Tok::KwSameAs},
  };
  return kw;
}

struct Lexer {
  std::string_view text;
  std::size_t pos = 0;
  std::size_t line = 1;
  std::size_t column = 1;
  std::vector<Token> tokens;
  std::optional<Diagnostic> error;

  void fail(const std::string& message) {
    error = Diagnostic{line, column, message, {}};
  }

  char peek() const { return pos < text.size() ? text[pos] : '\0'; }
  char peek2() const { return pos + 1 < text.size() ? text[pos + 1] : '\0'; }

  void advance() {
    if (text[pos] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
    ++pos;
  }

  void push(Tok kind, std::string tok_text, std::size_t l, std::size_t c,
            std::uint64_t number = 0) {
    tokens.push_back({kind, std::move(tok_text), number, l, c});
  }

  static bool ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
  }
  static bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
  }

  void run() {
    while (pos < text.size() && !error) {
      const char c = peek();
      const std::size_t l = line, col = column;
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
        continue;
      }
      if (c == '"') {
        advance();
        std::string value;
        while (pos < text.size() && peek() != '"') {
          if (peek() == '\\' && (peek2() == '"' || peek2() == '\\')) {
            advance();
          }
          value += peek();
          advance();
        }
        if (pos >= text.size()) {
          fail("unterminated string literal");
          return;
        }
        advance();  // closing quote
        push(Tok::String, std::move(value), l, col);
        continue;
      }
      if (c == '#') {
        advance();
        if (!std::isdigit(static_cast<unsigned char>(peek()))) {
          fail("expected a number after '#'");
          return;
        }
        std::uint64_t n = 0;
        while (std::isdigit(static_cast<unsigned char>(peek()))) {
          n = n * 10 + static_cast<std::uint64_t>(peek() - '0');
          advance();
        }
        push(Tok::WidLit, "#", l, col, n);
        continue;
      }
      if (ident_start(c)) {
        std::string word;
        while (ident_char(peek())) {
          word += peek();
          advance();
        }
        if (auto it = keywords().find(word); it != keywords().end()) {
          push(it->second, word, l, col);
          continue;
        }
        if (peek() == ':') {
          advance();
          if (!ident_start(peek())) {
            fail("expected a kind name after ':'");
            return;
          }
          std::string kind_part;
          while (ident_char(peek())) {
            kind_part += peek();
            advance();
          }
          push(Tok::KindRef, word + ":" + kind_part, l, col);
          continue;
        }
        push(Tok::Ident, std::move(word), l, col);
        continue;
      }
      switch (c) {
        case '=':
          advance();
          push(Tok::Eq, "=", l, col);
          continue;
        case '!':
          advance();
          if (peek() != '=') {
            fail("expected '=' after '!'");
            return;
          }
          advance();
          push(Tok::Ne, "!=", l, col);
          continue;
        case '<':
          advance();
          if (peek() == '=') {
            advance();
            push(Tok::Le, "<=", l, col);
          } else {
            push(Tok::Lt, "<", l, col);
          }
          continue;
        case '>':
          advance();
          if (peek() == '=') {
            advance();
            push(Tok::Ge, ">=", l, col);
          } else if (peek() == '>') {
            advance();
            push(Tok::MapsTo, ">>", l, col);
          } else {
            push(Tok::Gt, ">", l, col);
          }
          continue;
        case '(':
          advance();
          push(Tok::LParen, "(", l, col);
          continue;
        case ')':
          advance();
          push(Tok::RParen, ")", l, col);
          continue;
        case ',':
          advance();
          push(Tok::Comma, ",", l, col);
          continue;
        case '|':
          advance();
          if (peek() != '|') {
            fail("expected '||'");
            return;
          }
          advance();
          push(Tok::Concat, "||", l, col);
          continue;
        default:
          fail(std::string("unexpected character '") + c + "'");
          return;
      }
    }
    tokens.push_back({Tok::End, "", 0, line, column});
  }
};

const char* token_name(Tok t) {
  switch (t) {
    case Tok::Ident: return "identifier";
    case Tok::KindRef: return "Perspective:Kind";
    case Tok::String: return "string";
    case Tok::WidLit: return "#wid";
    case Tok::Eq: return "=";
    case Tok::Ne: return "!=";
    case Tok::Lt: return "<";
    case Tok::Le: return "<=";
    case Tok::Gt: return ">";
    case Tok::Ge: return ">=";
    case Tok::LParen: return "(";
    case Tok::RParen: return ")";
    case Tok::Comma: return ",";
    case Tok::Concat: return "||";
    case Tok::MapsTo: return ">>";
    case Tok::KwSelect: return "SELECT";
    case Tok::KwProject: return "PROJECT";
    case Tok::KwInto: return "INTO";
    case Tok::KwUsing: return "USING";
    case Tok::KwCombine: return "COMBINE";
    case Tok::KwJoin: return "JOIN";
    case Tok::KwStrong: return "STRONG";
    case Tok::KwWeak: return "WEAK";
    case Tok::KwForward: return "FORWARD";
    case Tok::KwReverse: return "REVERSE";
    case Tok::KwKey: return "KEY";
    case Tok::KwUnion: return "UNION";
    case Tok::KwDiff: return "DIFF";
    case Tok::KwIntersect: return "INTERSECT";
    case Tok::KwWhere: return "WHERE";
    case Tok::KwAnd: return "AND";
    case Tok::KwOr: return "OR";
    case Tok::KwNot: return "NOT";
    case Tok::KwAll: return "ALL";
    case Tok::KwSelf: return "SELF";
    case Tok::KwWith: return "WITH";
    case Tok::KwWithout: return "WITHOUT";
    case Tok::KwDerived: return "DERIVED";
    case Tok::KwFrom: return "FROM";
    case Tok::KwIncludedIn: return "INCLUDED_IN";
    case Tok::KwIncludes: return "INCLUDES";
    case Tok::KwSameAs: return "SAME_AS";
    case Tok::End: return "end of input";
  }
  return "?";
}

struct Parser {
  std::vector<Token> tokens;
  std::size_t pos = 0;
  std::optional<Diagnostic> error;

  const Token& cur() const { return tokens[pos]; }
  bool at(Tok t) const { return cur().kind == t; }

  bool accept(Tok t) {
    if (!at(t)) return false;
    ++pos;
    return true;
  }

  void fail(std::vector<Tok> expected) {
    if (error) return;
    Diagnostic d;
    d.line = cur().line;
    d.column = cur().column;
    std::string got = cur().kind == Tok::End ? "end of input" : "\"" + cur().text + "\"";
    d.message = "unexpected " + got;
    for (Tok t : expected) d.expected.push_back(token_name(t));
    error = std::move(d);
  }

  bool expect(Tok t) {
    if (accept(t)) return true;
    fail({t});
    return false;
  }

  // --- predicates -----------------------------------------------------------

  algebra::PredicatePtr parse_pred() { return parse_or(); }

  algebra::PredicatePtr parse_or() {
    auto first = parse_and();
    if (!first) return nullptr;
    if (!at(Tok::KwOr)) return first;
    std::vector<algebra::PredicatePtr> children{first};
    while (accept(Tok::KwOr)) {
      auto next = parse_and();
      if (!next) return nullptr;
      children.push_back(next);
    }
    return algebra::Predicate::make_or(std::move(children));
  }

  algebra::PredicatePtr parse_and() {
    auto first = parse_unary();
    if (!first) return nullptr;
    if (!at(Tok::KwAnd)) return first;
    std::vector<algebra::PredicatePtr> children{first};
    while (accept(Tok::KwAnd)) {
      auto next = parse_unary();
      if (!next) return nullptr;
      children.push_back(next);
    }
    return algebra::Predicate::make_and(std::move(children));
  }

  algebra::PredicatePtr parse_unary() {
    if (accept(Tok::KwNot)) {
      auto inner = parse_unary();
      if (!inner) return nullptr;
      return algebra::Predicate::make_not(std::move(inner));
    }
    if (accept(Tok::LParen)) {
      auto inner = parse_pred();
      if (!inner) return nullptr;
      if (!expect(Tok::RParen)) return nullptr;
      return inner;
    }
    return parse_term();
  }

  std::optional<algebra::CmpOp> cmp_op() {
    if (accept(Tok::Eq)) return algebra::CmpOp::Eq;
    if (accept(Tok::Ne)) return algebra::CmpOp::Ne;
    if (accept(Tok::Lt)) return algebra::CmpOp::Lt;
    if (accept(Tok::Le)) return algebra::CmpOp::Le;
    if (accept(Tok::Gt)) return algebra::CmpOp::Gt;
    if (accept(Tok::Ge)) return algebra::CmpOp::Ge;
    return std::nullopt;
  }

  std::optional<algebra::RelOp> rel_op() {
    if (accept(Tok::KwIncludedIn)) return algebra::RelOp::IncludedIn;
    if (accept(Tok::KwIncludes)) return algebra::RelOp::Includes;
    if (accept(Tok::KwSameAs)) return algebra::RelOp::SameAs;
    return std::nullopt;
  }

  algebra::PredicatePtr parse_term() {
    if (accept(Tok::KwSelf)) {
      auto op = rel_op();
      if (!op) {
        fail({Tok::KwIncludedIn, Tok::KwIncludes, Tok::KwSameAs});
        return nullptr;
      }
      algebra::RelationTerm t;
      t.op = *op;
      if (!parse_rel_rhs(t)) return nullptr;
      return algebra::Predicate::make_relation(std::move(t));
    }
    if (at(Tok::KindRef)) {
      std::string kind = cur().text;
      ++pos;
      if (auto op = cmp_op()) {
        if (!at(Tok::String)) {
          fail({Tok::String});
          return nullptr;
        }
        algebra::ValueTerm t;
        t.kind = std::move(kind);
        t.op = *op;
        t.constant = cur().text;
        ++pos;
        return algebra::Predicate::make_value(std::move(t));
      }
      if (auto op = rel_op()) {
        algebra::RelationTerm t;
        t.lhs_kind = std::move(kind);
        t.op = *op;
        if (!parse_rel_rhs(t)) return nullptr;
        return algebra::Predicate::make_relation(std::move(t));
      }
      fail({Tok::Eq, Tok::KwIncludedIn});
      return nullptr;
    }
    fail({Tok::KindRef, Tok::KwSelf, Tok::KwNot, Tok::LParen});
    return nullptr;
  }

  bool parse_rel_rhs(algebra::RelationTerm& t) {
    if (at(Tok::WidLit)) {
      t.rhs = static_cast<Wid>(cur().number);
      ++pos;
      return true;
    }
    if (at(Tok::KindRef)) {
      t.rhs = cur().text;
      ++pos;
      return true;
    }
    fail({Tok::WidLit, Tok::KindRef});
    return false;
  }

  // --- queries ---------------------------------------------------------------

  QueryPtr parse_query() { return parse_setexpr(); }

  QueryPtr parse_setexpr() {
    auto lhs = parse_primary();
    if (!lhs) return nullptr;
    while (at(Tok::KwUnion) || at(Tok::KwDiff) || at(Tok::KwIntersect)) {
      const Tok op = cur().kind;
      ++pos;
      auto rhs = parse_primary();
      if (!rhs) return nullptr;
      auto node = std::make_shared<Query>();
      node->op = op == Tok::KwUnion  ? Query::Op::Union
                 : op == Tok::KwDiff ? Query::Op::Diff
                                     : Query::Op::Intersect;
      node->lhs = std::move(lhs);
      node->rhs = std::move(rhs);
      lhs = std::move(node);
    }
    return lhs;
  }

  QueryPtr parse_primary() {
    if (accept(Tok::LParen)) {
      auto inner = parse_query();
      if (!inner) return nullptr;
      if (!expect(Tok::RParen)) return nullptr;
      return inner;
    }
    if (at(Tok::KwSelect)) return parse_select();
    if (at(Tok::KwProject)) return parse_project();
    if (at(Tok::KwCombine)) return parse_combine();
    if (at(Tok::KwJoin)) return parse_join();
    fail({Tok::KwSelect, Tok::KwProject, Tok::KwCombine, Tok::KwJoin, Tok::LParen});
    return nullptr;
  }

  bool parse_scope(Query& q) {
    if (accept(Tok::KwAll)) return true;
    if (at(Tok::KindRef)) {
      q.scope_kind = cur().text;
      ++pos;
      return true;
    }
    if (at(Tok::WidLit)) {
      q.scope_wid = static_cast<Wid>(cur().number);
      ++pos;
      return true;
    }
    fail({Tok::KindRef, Tok::WidLit, Tok::KwAll});
    return false;
  }

  bool parse_select_tail(Query& q) {
    if (accept(Tok::KwWhere)) {
      q.where = parse_pred();
      if (!q.where) return false;
    }
    if (at(Tok::KwWith) && tokens[pos + 1].kind == Tok::KwDerived) {
      pos += 2;
      q.include_derived = true;
    } else if (accept(Tok::KwWithout)) {
      if (!expect(Tok::KwDerived)) return false;
      q.include_derived = false;
    }
    return true;
  }

  QueryPtr parse_select() {
    expect(Tok::KwSelect);
    auto q = std::make_shared<Query>();
    q->op = Query::Op::Select;
    if (!parse_scope(*q)) return nullptr;
    if (!parse_select_tail(*q)) return nullptr;
    return q;
  }

  QueryPtr parse_project() {
    expect(Tok::KwProject);
    auto q = std::make_shared<Query>();
    q->op = Query::Op::Project;
    if (!parse_scope(*q)) return nullptr;
    if (accept(Tok::KwWhere)) {
      q->where = parse_pred();
      if (!q->where) return nullptr;
    }
    if (!expect(Tok::KwInto)) return nullptr;
    if (!at(Tok::KindRef)) {
      fail({Tok::KindRef});
      return nullptr;
    }
    q->target_kind = cur().text;
    ++pos;
    if (!expect(Tok::KwUsing)) return nullptr;
    do {
      algebra::ProjectionRule rule;
      if (!parse_rule(rule)) return nullptr;
      q->rules.push_back(std::move(rule));
    } while (accept(Tok::Comma));
    return q;
  }

  bool parse_rule(algebra::ProjectionRule& rule) {
    // constant injection: Ident = "value"
    if (at(Tok::Ident) && tokens[pos + 1].kind == Tok::Eq) {
      rule.target_kind = cur().text;
      pos += 2;
      if (!at(Tok::String)) {
        fail({Tok::String});
        return false;
      }
      rule.constant = cur().text;
      ++pos;
      return true;
    }
    if (!parse_source_parts(rule.source)) return false;
    if (!expect(Tok::MapsTo)) return false;
    if (!at(Tok::Ident)) {
      fail({Tok::Ident});
      return false;
    }
    rule.target_kind = cur().text;
    ++pos;
    return true;
  }

  bool parse_source_parts(std::vector<algebra::SourcePart>& parts) {
    do {
      algebra::SourcePart part;
      if (!parse_source_part(part)) return false;
      parts.push_back(std::move(part));
    } while (accept(Tok::Concat));
    return true;
  }

  bool parse_source_part(algebra::SourcePart& part) {
    if (at(Tok::KindRef)) {
      part.kind = algebra::SourcePart::Kind::KindRef;
      part.text = cur().text;
      ++pos;
      return true;
    }
    if (at(Tok::String)) {
      part.kind = algebra::SourcePart::Kind::Literal;
      part.text = cur().text;
      ++pos;
      return true;
    }
    if (at(Tok::Ident)) {
      part.kind = algebra::SourcePart::Kind::Enrich;
      part.text = cur().text;
      ++pos;
      if (!expect(Tok::LParen)) return false;
      if (!parse_source_parts(part.args)) return false;
      return expect(Tok::RParen);
    }
    fail({Tok::KindRef, Tok::String, Tok::Ident});
    return false;
  }

  QueryPtr parse_combine() {
    expect(Tok::KwCombine);
    auto q = std::make_shared<Query>();
    q->op = Query::Op::Combine;
    if (!expect(Tok::KwInto)) return nullptr;
    if (!at(Tok::KindRef)) {
      fail({Tok::KindRef});
      return nullptr;
    }
    q->target_kind = cur().text;
    ++pos;
    if (!expect(Tok::KwUsing)) return nullptr;
    do {
      Query::Component comp;
      if (!at(Tok::KindRef)) {
        fail({Tok::KindRef});
        return nullptr;
      }
      comp.role_kind = cur().text;
      ++pos;
      if (!expect(Tok::KwFrom)) return nullptr;
      if (!expect(Tok::LParen)) return nullptr;
      comp.selection = parse_query();
      if (!comp.selection) return nullptr;
      if (!expect(Tok::RParen)) return nullptr;
      q->components.push_back(std::move(comp));
    } while (accept(Tok::Comma));
    return q;
  }

  QueryPtr parse_join() {
    expect(Tok::KwJoin);
    auto q = std::make_shared<Query>();
    if (accept(Tok::KwStrong)) {
      q->op = Query::Op::JoinStrong;
    } else if (accept(Tok::KwWeak)) {
      q->op = Query::Op::JoinWeak;
      if (accept(Tok::KwForward)) {
        q->direction = algebra::JoinDirection::Forward;
      } else if (accept(Tok::KwReverse)) {
        q->direction = algebra::JoinDirection::Reverse;
      } else {
        fail({Tok::KwForward, Tok::KwReverse});
        return nullptr;
      }
    } else {
      fail({Tok::KwStrong, Tok::KwWeak});
      return nullptr;
    }
    if (!expect(Tok::LParen)) return nullptr;
    q->lhs = parse_query();
    if (!q->lhs) return nullptr;
    if (!expect(Tok::RParen)) return nullptr;
    if (!expect(Tok::KwKey)) return nullptr;
    if (!at(Tok::KindRef)) {
      fail({Tok::KindRef});
      return nullptr;
    }
    q->key_a = cur().text;
    ++pos;
    if (!expect(Tok::Comma)) return nullptr;
    if (!expect(Tok::LParen)) return nullptr;
    q->rhs = parse_query();
    if (!q->rhs) return nullptr;
    if (!expect(Tok::RParen)) return nullptr;
    if (!expect(Tok::KwKey)) return nullptr;
    if (!at(Tok::KindRef)) {
      fail({Tok::KindRef});
      return nullptr;
    }
    q->key_b = cur().text;
    ++pos;
    if (!expect(Tok::KwUsing)) return nullptr;
    if (!at(Tok::KindRef)) {
      fail({Tok::KindRef});
      return nullptr;
    }
    q->target_kind = cur().text;
    ++pos;
    return q;
  }
};

// ---------------------------------------------------------------------------
// Printer
// ---------------------------------------------------------------------------

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

std::string print_pred(const algebra::Predicate& p, bool parenthesize_composite);

std::string cmp_text(algebra::CmpOp op) {
  switch (op) {
    case algebra::CmpOp::Eq: return "=";
    case algebra::CmpOp::Ne: return "!=";
    case algebra::CmpOp::Lt: return "<";
    case algebra::CmpOp::Le: return "<=";
    case algebra::CmpOp::Gt: return ">";
    case algebra::CmpOp::Ge: return ">=";
  }
  return "=";
}

std::string rel_text(algebra::RelOp op) {
  switch (op) {
    case algebra::RelOp::IncludedIn: return "INCLUDED_IN";
    case algebra::RelOp::Includes: return "INCLUDES";
    case algebra::RelOp::SameAs: return "SAME_AS";
  }
  return "INCLUDED_IN";
}

std::string print_pred(const algebra::Predicate& p, bool parenthesize_composite) {
  using Node = algebra::Predicate::Node;
  switch (p.node) {
    case Node::Value:
      return p.value.kind + " " + cmp_text(p.value.op) + " \"" + escape(p.value.constant) + "\"";
    case Node::Relation: {
      std::string lhs = p.relation.lhs_kind ? *p.relation.lhs_kind : "SELF";
      std::string rhs = std::holds_alternative<Wid>(p.relation.rhs)
                            ? "#" + std::to_string(std::get<Wid>(p.relation.rhs))
                            : std::get<std::string>(p.relation.rhs);
      return lhs + " " + rel_text(p.relation.op) + " " + rhs;
    }
    case Node::Not:
      return "NOT " + print_pred(*p.children.at(0), true);
    case Node::And:
    case Node::Or: {
      const char* joiner = p.node == Node::And ? " AND " : " OR ";
      std::string out;
      for (std::size_t i = 0; i < p.children.size(); ++i) {
        if (i) out += joiner;
        const auto& c = *p.children[i];
        const bool composite = c.node == Node::And || c.node == Node::Or;
        out += composite ? "(" + print_pred(c, false) + ")" : print_pred(c, true);
      }
      if (parenthesize_composite) return "(" + out + ")";
      return out;
    }
  }
  return "";
}

std::string print_parts(const std::vector<algebra::SourcePart>& parts);

std::string print_part(const algebra::SourcePart& part) {
  switch (part.kind) {
    case algebra::SourcePart::Kind::KindRef: return part.text;
    case algebra::SourcePart::Kind::Literal: return "\"" + escape(part.text) + "\"";
    case algebra::SourcePart::Kind::Enrich: return part.text + "(" + print_parts(part.args) + ")";
  }
  return "";
}

std::string print_parts(const std::vector<algebra::SourcePart>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += " || ";
    out += print_part(parts[i]);
  }
  return out;
}

std::string print_query(const Query& q);

std::string print_scope(const Query& q) {
  if (q.scope_kind) return *q.scope_kind;
  if (q.scope_wid) return "#" + std::to_string(*q.scope_wid);
  return "ALL";
}

std::string print_select_tail(const Query& q) {
  std::string out;
  if (q.where) out += " WHERE " + print_pred(*q.where, false);
  if (q.include_derived.has_value()) {
    out += *q.include_derived ? " WITH DERIVED" : " WITHOUT DERIVED";
  }
  return out;
}

std::string print_primary(const Query& q) {
  if (q.op == Query::Op::Select) return print_query(q);
  return "(" + print_query(q) + ")";
}

std::string print_query(const Query& q) {
  switch (q.op) {
    case Query::Op::Select:
      return "SELECT " + print_scope(q) + print_select_tail(q);
    case Query::Op::Union:
      return print_primary(*q.lhs) + " UNION " + print_primary(*q.rhs);
    case Query::Op::Diff:
      return print_primary(*q.lhs) + " DIFF " + print_primary(*q.rhs);
    case Query::Op::Intersect:
      return print_primary(*q.lhs) + " INTERSECT " + print_primary(*q.rhs);
    case Query::Op::Project: {
      std::string out = "PROJECT " + print_scope(q);
      if (q.where) out += " WHERE " + print_pred(*q.where, false);
      out += " INTO " + q.target_kind + " USING ";
      for (std::size_t i = 0; i < q.rules.size(); ++i) {
        if (i) out += ", ";
        const auto& rule = q.rules[i];
        if (rule.constant) {
          out += rule.target_kind + " = \"" + escape(*rule.constant) + "\"";
        } else {
          out += print_parts(rule.source) + " >> " + rule.target_kind;
        }
      }
      return out;
    }
    case Query::Op::Combine: {
      std::string out = "COMBINE INTO " + q.target_kind + " USING ";
      for (std::size_t i = 0; i < q.components.size(); ++i) {
        if (i) out += ", ";
        out += q.components[i].role_kind + " FROM (" + print_query(*q.components[i].selection) + ")";
      }
      return out;
    }
    case Query::Op::JoinStrong:
    case Query::Op::JoinWeak: {
      std::string out = "JOIN ";
      if (q.op == Query::Op::JoinStrong) {
        out += "STRONG";
      } else {
        out += "WEAK ";
        out += q.direction == algebra::JoinDirection::Forward ? "FORWARD" : "REVERSE";
      }
      out += " (" + print_query(*q.lhs) + ") KEY " + q.key_a;
      out += ", (" + print_query(*q.rhs) + ") KEY " + q.key_b;
      out += " USING " + q.target_kind;
      return out;
    }
  }
  return "";
}

}  // namespace

std::string Diagnostic::to_string() const {
  std::ostringstream out;
  out << "syntax error at " << line << ":" << column << ": " << message;
  if (!expected.empty()) {
    out << "; expected ";
    for (std::size_t i = 0; i < expected.size(); ++i) {
      if (i) out << " | ";
      out << expected[i];
    }
  }
  return out.str();
}

ParseResult parse(std::string_view text) {
  Lexer lexer;
  lexer.text = text;
  lexer.run();
  if (lexer.error) return {nullptr, lexer.error};
  Parser parser;
  parser.tokens = std::move(lexer.tokens);
  auto q = parser.parse_query();
  if (!q || parser.error) {
    if (!parser.error) parser.fail({});
    return {nullptr, parser.error};
  }
  if (!parser.at(Tok::End)) {
    parser.fail({Tok::End});
    return {nullptr, parser.error};
  }
  return {q, std::nullopt};
}

std::string print(const Query& q) { return print_query(q); }

std::string print(const algebra::Predicate& p) { return print_pred(p, false); }

// ---------------------------------------------------------------------------
// AST equality
// ---------------------------------------------------------------------------

namespace {

bool ptr_query_equal(const QueryPtr& a, const QueryPtr& b) {
  if (!a && !b) return true;
  if (!a || !b) return false;
  return query_equal(*a, *b);
}

bool parts_equal(const std::vector<algebra::SourcePart>& a,
                 const std::vector<algebra::SourcePart>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].kind != b[i].kind || a[i].text != b[i].text) return false;
    if (!parts_equal(a[i].args, b[i].args)) return false;
  }
  return true;
}

}  // namespace

bool query_equal(const Query& a, const Query& b) {
  if (a.op != b.op || a.scope_kind != b.scope_kind || a.scope_wid != b.scope_wid ||
      a.include_derived != b.include_derived || a.target_kind != b.target_kind ||
      a.key_a != b.key_a || a.key_b != b.key_b || a.direction != b.direction) {
    return false;
  }
  if (static_cast<bool>(a.where) != static_cast<bool>(b.where)) return false;
  if (a.where && !algebra::predicate_equal(*a.where, *b.where)) return false;
  if (!ptr_query_equal(a.lhs, b.lhs) || !ptr_query_equal(a.rhs, b.rhs)) return false;
  if (a.rules.size() != b.rules.size()) return false;
  for (std::size_t i = 0; i < a.rules.size(); ++i) {
    if (a.rules[i].target_kind != b.rules[i].target_kind ||
        a.rules[i].constant != b.rules[i].constant ||
        !parts_equal(a.rules[i].source, b.rules[i].source)) {
      return false;
    }
  }
  if (a.components.size() != b.components.size()) return false;
  for (std::size_t i = 0; i < a.components.size(); ++i) {
    if (a.components[i].role_kind != b.components[i].role_kind ||
        !ptr_query_equal(a.components[i].selection, b.components[i].selection)) {
      return false;
    }
  }
  return true;
}

}  // namespace shadow::query

#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "stem31/coeff.hpp"
#include "stem31/space.hpp"

namespace stem31 {

/*
 * Expression syntax:
 *
 *   expr   := term ('+' term)*
 *   term   := coeff* factor ('.' factor)*
 *   factor := NAME '(' INT ')' | iota '(' INT ')' | 'E' ['^' INT] '(' expr ')'
 *           | 'H' '(' expr ')' | 'P' '(' expr ')' | '[' expr ',' expr ']'
 *           | '{' expr ',' expr ',' expr '}' ['_' INT] | '0' | '(' expr ')'
 *           | 'pi' '(' INT ',' SPACE ')' | 'span' '{' expr (',' expr)* '}'
 *   coeff  := INT ['*'] | 'pm' INT | 'odd' '[' NAME ']' | 'sym' '[' NAME ']'
 *
 * a.b is the composite "apply b, then a": the right factor is the inner map.
 * The pi(...) and span{...} factors make an expression set-valued (a whole
 * group, or the subgroup its arguments generate); Toda brackets are
 * set-valued as well.  Everything else denotes a single class.
 */

struct Expr;
using EP = std::shared_ptr<const Expr>;

// Cls instance value marking a bare name (a script let-variable).
constexpr int kBareInst = -1000000;

struct Expr {
  enum class K { Zero, Iota, Cls, Susp, Hopf, PMap, Comp, Sum, Scal, Wh, Brk, PiSet, Span };
  K k = K::Zero;
  int n = 0;            // Iota: dimension, Susp: power, Brk: subscript t, PiSet: k
  std::string name;     // Cls
  int inst = 0;         // Cls: the instance written in parentheses
  Space sp;             // PiSet
  Coeff c;              // Scal
  std::vector<EP> sub;  // children, outer-to-inner for Comp
};

EP mk_zero();
EP mk_iota(int n);
EP mk_cls(std::string name, int inst);
EP mk_susp(int t, EP e);
EP mk_hopf(EP e);
EP mk_pmap(EP e);
EP mk_comp(std::vector<EP> fs);
EP mk_sum(std::vector<EP> ts);
EP mk_scal(Coeff c, EP e);
EP mk_wh(EP a, EP b);
EP mk_brk(EP a, EP b, EP c, int t);
EP mk_piset(int k, Space x);
EP mk_span(std::vector<EP> gens);

// True somewhere in the tree: a pi/span/bracket factor makes it set-valued.
bool is_setvalued(const EP& e);

bool expr_eq(const EP& a, const EP& b);

enum class Style { Plain, Latex };
std::string show_expr(const EP& e, Style st = Style::Plain);

/**** shared lexer (also used by the catalog and script parsers) ****/

struct Tok {
  enum class K { Int, Name, Punct, Str, End } k = K::End;
  std::string text;
  i64 num = 0;
  int pos = 0;  // byte offset, for diagnostics
};

// Throws ParseError on bad input. '#' starts a comment to end of line.
std::vector<Tok> tokenize(const std::string& s);

struct ParseError {
  std::string msg;
  int pos = 0;
};

struct Parser {
  std::vector<Tok> toks;
  size_t at = 0;

  explicit Parser(const std::string& s) : toks(tokenize(s)) {}

  const Tok& peek(int ahead = 0) const;
  Tok next();
  bool is_punct(const std::string& p, int ahead = 0) const;
  bool is_name(const std::string& n, int ahead = 0) const;
  void expect_punct(const std::string& p);
  std::string expect_name();
  i64 expect_int();
  bool done() const { return peek().k == Tok::K::End; }
  [[noreturn]] void fail(const std::string& msg) const;

  EP parse_expr();   // full expression
  EP parse_term();   // single term
};

// Parse a complete string as one expression (must consume all input).
EP parse_expr_str(const std::string& s);

}  // namespace stem31

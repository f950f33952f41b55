#include "stem31/script.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>

namespace stem31 {

namespace {

/*
 * Ids borrow the catalog convention: a run of tokens with no whitespace
 * between them is one id ("2.8a" lexes as four tokens).  A '~' or ','
 * terminates the run so "w15~" still cites w15.
 */
std::string read_cite(Parser& p) {
  const Tok& t0 = p.peek();
  if (t0.k != Tok::K::Name && t0.k != Tok::K::Int) p.fail("expected an id");
  int end = t0.pos + static_cast<int>(t0.text.size());
  std::string id = p.next().text;
  for (;;) {
    const Tok& t = p.peek();
    if (t.k == Tok::K::End || t.pos != end) break;
    if (t.k == Tok::K::Punct && (t.text == "~" || t.text == ",")) break;
    id += t.text;
    end = t.pos + static_cast<int>(t.text.size());
    p.next();
  }
  return id;
}

bool eat_rev(Parser& p) {
  if (!p.is_punct("~")) return false;
  p.next();
  return true;
}

struct ScriptParser {
  Script sc;
  std::vector<std::string> errors;
  std::string filename;
  int line = 0;
  bool saw_header = false;

  void error(const std::string& msg) {
    errors.push_back(fmt::format("{}:{}: {}", filename, line, msg));
  }

  Step step_of(Step::K k, const std::string& text) {
    Step s;
    s.k = k;
    s.line = line;
    s.text = text;
    return s;
  }

  // two- or one-word step kind; "shuffle-left" lexes as three tokens
  std::string read_kind(Parser& p) {
    std::string kind = p.expect_name();
    if ((kind == "shuffle" || kind == "absorb") && p.is_punct("-")) {
      p.next();
      kind += "-" + p.expect_name();
    }
    return kind;
  }

  Step parse_step_body(Parser& p, const std::string& text, bool nested) {
    std::string kind = read_kind(p);
    if (kind == "focus") {
      Step s = step_of(Step::K::Focus, text);
      s.e1 = p.parse_expr();
      return s;
    }
    if (kind == "gives") {
      Step s = step_of(Step::K::Gives, text);
      s.e1 = p.parse_expr();
      return s;
    }
    if (kind == "rewrite" || kind == "eq") {
      Step s = step_of(kind == "eq" ? Step::K::EqFact : Step::K::Rewrite, text);
      s.id = read_cite(p);
      s.rev = eat_rev(p);
      s.m = -1;
      if (p.is_name("at")) {
        p.next();
        s.m = p.expect_int();
      }
      return s;
    }
    if (kind == "congr") {
      Step s = step_of(Step::K::Congr, text);
      s.id = read_cite(p);
      s.rev = eat_rev(p);
      s.m = 2;  // try a, then b
      if (p.is_name("at")) {
        p.next();
        std::string side = p.expect_name();
        if (side == "a") s.m = 0;
        else if (side == "b") s.m = 1;
        else p.fail("expected side a or b");
      }
      return s;
    }
    if (kind == "normalize") return step_of(Step::K::Normalize, text);
    if (kind == "mono") {
      Step s = step_of(Step::K::Mono, text);
      s.map = parse_map(p);
      if (!p.is_name("by")) p.fail("expected 'by <fact-id>'");
      p.next();
      s.id = read_cite(p);
      return s;
    }
    if (kind == "exact") {
      Step s = step_of(Step::K::ExactKer, text);
      if (!p.is_name("ker")) p.fail("expected 'ker'");
      p.next();
      s.map = parse_map(p);
      p.expect_punct("=");
      s.e1 = p.parse_expr();
      if (!p.is_name("by")) p.fail("expected 'by <fact-id>'");
      p.next();
      s.id = read_cite(p);
      return s;
    }
    if (kind == "wd") {
      Step s = step_of(Step::K::Wd, text);
      s.e1 = p.parse_expr();
      return s;
    }
    if (kind == "indet") {
      Step s = step_of(Step::K::Indet, text);
      s.e1 = p.parse_expr();
      if (p.is_punct("=")) {
        p.next();
        s.expect = true;
        if (p.peek().k == Tok::K::Int && p.peek().num == 0 && p.peek(1).k == Tok::K::End) {
          p.next();  // "= 0": trivial expected
        } else {
          s.list.push_back(p.parse_expr());
          while (p.is_punct(",")) {
            p.next();
            s.list.push_back(p.parse_expr());
          }
        }
      }
      return s;
    }
    if (kind == "mem" || kind == "meet" || kind == "same") {
      Step s = step_of(kind == "mem"    ? Step::K::Mem
                       : kind == "meet" ? Step::K::Meet
                                        : Step::K::Same,
                       text);
      s.id = read_cite(p);
      return s;
    }
    if (kind == "take") {
      Step s = step_of(Step::K::Take, text);
      s.e1 = p.parse_expr();
      return s;
    }
    if (kind == "lcomp" || kind == "rcomp") {
      Step s = step_of(kind == "lcomp" ? Step::K::LComp : Step::K::RComp, text);
      s.e1 = p.parse_expr();
      return s;
    }
    if (kind == "shuffle-left" || kind == "absorb-left") {
      Step s = step_of(kind == "shuffle-left" ? Step::K::ShuffleL : Step::K::AbsorbL, text);
      s.e2 = p.parse_expr();
      if (!p.is_name("into")) p.fail("expected 'into <bracket>'");
      p.next();
      s.e1 = p.parse_expr();
      return s;
    }
    if (kind == "shuffle-right" || kind == "absorb-right") {
      Step s = step_of(kind == "shuffle-right" ? Step::K::ShuffleR : Step::K::AbsorbR, text);
      s.e1 = p.parse_expr();
      if (!p.is_name("by")) p.fail("expected 'by <expr>'");
      p.next();
      s.e2 = p.parse_expr();
      return s;
    }
    if (kind == "slide" || kind == "split") {
      Step s = step_of(kind == "slide" ? Step::K::Slide : Step::K::Split, text);
      s.e1 = p.parse_expr();
      if (!p.is_name("at")) p.fail("expected 'at <entry>'");
      p.next();
      s.m = p.expect_int();
      return s;
    }
    if (kind == "scalar") {
      Step s = step_of(Step::K::Scalar, text);
      s.e1 = p.parse_expr();
      if (!p.is_name("by")) p.fail("expected 'by <int>'");
      p.next();
      s.m = p.expect_int();
      return s;
    }
    if (kind == "suspend") {
      Step s = step_of(Step::K::Suspend, text);
      bool eqby_next = p.is_name("eq") && p.is_punct("-", 1);
      if (!p.done() && !eqby_next) s.e1 = p.parse_expr();
      if (p.is_name("eq")) {
        p.next();
        p.expect_punct("-");
        if (!p.is_name("by")) p.fail("expected 'eq-by <fact-id>'");
        p.next();
        s.id = read_cite(p);
      }
      return s;
    }
    if (kind == "relax" || kind == "subeq") {
      Step s = step_of(kind == "relax" ? Step::K::Relax : Step::K::Subeq, text);
      s.e1 = p.parse_expr();
      if (!p.is_name("to")) p.fail("expected 'to <subscript>'");
      p.next();
      s.m = p.expect_int();
      return s;
    }
    if (kind == "entrynf") {
      Step s = step_of(Step::K::EntryNf, text);
      if (!p.is_name("at")) s.e1 = p.parse_expr();
      if (!p.is_name("at")) p.fail("expected 'at <entry>'");
      p.next();
      s.m = p.expect_int();
      return s;
    }
    if (kind == "entryrw") {
      Step s = step_of(Step::K::EntryRw, text);
      s.id = read_cite(p);
      s.rev = eat_rev(p);
      if (!p.is_name("at")) p.fail("expected 'at <entry>'");
      p.next();
      s.m = p.expect_int();
      return s;
    }
    if (kind == "jacobi") {
      Step s = step_of(Step::K::Jacobi, text);
      for (int i = 0; i < 5; ++i) {
        if (i && p.is_punct(",")) p.next();
        s.list.push_back(p.parse_expr());
      }
      return s;
    }
    if (kind == "at") {
      if (nested) p.fail("'at' does not nest");
      Step s = step_of(Step::K::At, text);
      s.m = p.expect_int();
      Step in = parse_step_body(p, text, true);
      switch (in.k) {
        case Step::K::Rewrite: case Step::K::EqFact: case Step::K::EntryNf:
        case Step::K::EntryRw: case Step::K::Indet: case Step::K::Rep:
        case Step::K::Split: case Step::K::Slide: case Step::K::AbsorbL:
        case Step::K::AbsorbR: case Step::K::Relax: case Step::K::Scalar:
          break;
        default:
          p.fail("that step kind cannot run against one part of a sum");
      }
      s.inner.push_back(std::move(in));
      return s;
    }
    if (kind == "extract") {
      Step s = step_of(Step::K::Extract, text);
      s.m = p.expect_int();
      return s;
    }
    if (kind == "rep") {
      Step s = step_of(Step::K::Rep, text);
      if (p.peek().k == Tok::K::Int && p.peek().num == 0) {
        p.next();
        s.id = "0";
      } else {
        s.id = read_cite(p);
      }
      return s;
    }
    if (kind == "order") {
      Step s = step_of(Step::K::Order, text);
      s.e1 = p.parse_expr();
      p.expect_punct("=");
      s.m = p.expect_int();
      if (p.is_name("by")) {
        p.next();
        s.id = read_cite(p);
      }
      return s;
    }
    if (kind == "group") {
      Step s = step_of(Step::K::Group, text);
      std::string tok = p.expect_name();
      auto x = parse_space(tok);
      if (!x) p.fail(fmt::format("bad space '{}'", tok));
      s.sp = *x;
      s.m = p.expect_int();
      if (!p.is_name("is")) p.fail("expected 'is <n>+<n>+...'");
      p.next();
      s.invs.push_back(p.expect_int());
      while (p.is_punct("+")) {
        p.next();
        s.invs.push_back(p.expect_int());
      }
      return s;
    }
    if (kind == "cases") {
      Step s = step_of(Step::K::Cases, text);
      s.id = p.expect_name();
      if (!p.is_name("in")) p.fail("expected 'in {v, ...}'");
      p.next();
      p.expect_punct("{");
      s.invs.push_back(p.expect_int());
      while (p.is_punct(",")) {
        p.next();
        s.invs.push_back(p.expect_int());
      }
      p.expect_punct("}");
      return s;
    }
    p.fail(fmt::format("unknown step kind '{}'", kind));
  }

  void parse_line(const std::string& raw) {
    std::string text = raw;
    if (auto h = text.find('#'); h != std::string::npos) text.resize(h);
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.pop_back();
    size_t b = 0;
    while (b < text.size() && std::isspace(static_cast<unsigned char>(text[b]))) ++b;
    text.erase(0, b);

    Parser p(text);
    if (p.done()) return;
    std::string head = p.expect_name();
    if (head == "script") {
      if (saw_header) p.fail("duplicate script header");
      sc.id = p.expect_name();
      saw_header = true;
    } else if (head == "uses" || head == "proves") {
      auto& out = head == "uses" ? sc.uses : sc.proves;
      while (!p.done()) {
        out.push_back(read_cite(p));
        if (p.is_punct(",")) p.next();
      }
      if (out.empty()) p.fail(fmt::format("empty {} list", head));
    } else if (head == "let") {
      Step s = step_of(Step::K::Let, text);
      s.id = p.expect_name();
      p.expect_punct("=");
      s.e1 = p.parse_expr();
      sc.steps.push_back(std::move(s));
    } else if (head == "step") {
      sc.steps.push_back(parse_step_body(p, text, false));
    } else if (head == "conclude") {
      Step s = step_of(Step::K::Conclude, text);
      if (p.peek().k == Tok::K::Name && p.is_punct(":", 1)) {
        s.id = p.next().text;
        p.next();
      }
      s.stmt = parse_stmt(p);
      sc.steps.push_back(std::move(s));
    } else {
      p.fail(fmt::format("unknown directive '{}'", head));
    }
    if (!p.done()) p.fail("trailing input after directive");
  }
};

}  // namespace

Script parse_script(const std::string& text, const std::string& filename) {
  ScriptParser sp;
  sp.filename = filename;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    ++sp.line;
    try {
      sp.parse_line(line);
    } catch (const ParseError& e) {
      sp.error(fmt::format("{} (at column {})", e.msg, e.pos + 1));
    }
  }
  if (!sp.saw_header) sp.errors.insert(sp.errors.begin(), filename + ": missing script header");
  if (!sp.errors.empty()) throw LoadError{fmt::to_string(fmt::join(sp.errors, "\n"))};
  sp.sc.file = filename;
  return std::move(sp.sc);
}

Script load_script(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LoadError{fmt::format("cannot open script '{}'", path)};
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_script(ss.str(), path);
}

}  // namespace stem31

#include "goalrec/strips.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <fstream>
#include <functional>
#include <limits>
#include <ostream>
#include <queue>
#include <set>
#include <sstream>
#include <tuple>

#include "goalrec/instrumentation.hpp"

namespace goalrec::strips {

namespace {

// ---------------------------------------------------------------------------
// S-expressions

struct SExpr {
  bool is_list = false;
  std::string atom;
  std::vector<SExpr> items;
  std::size_t line = 0;

  bool is(std::string_view a) const { return !is_list && atom == a; }
  // First element when it is an atom, otherwise "".
  const std::string& head() const {
    static const std::string empty;
    return (is_list && !items.empty() && !items[0].is_list) ? items[0].atom : empty;
  }
};

struct Token {
  std::string text;
  std::size_t line;
};

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  std::size_t line = 1;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (c == '\n') {
      ++line;
      ++i;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == ';') {
      while (i < text.size() && text[i] != '\n') ++i;
    } else if (c == '(' || c == ')') {
      out.push_back({std::string(1, c), line});
      ++i;
    } else {
      std::size_t j = i;
      while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j])) &&
             text[j] != '(' && text[j] != ')' && text[j] != ';') {
        ++j;
      }
      std::string tok(text.substr(i, j - i));
      std::transform(tok.begin(), tok.end(), tok.begin(),
                     [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
      out.push_back({std::move(tok), line});
      i = j;
    }
  }
  return out;
}

SExpr parse_sexpr(const std::vector<Token>& toks, std::size_t& pos) {
  if (pos >= toks.size()) throw Error("unexpected end of input");
  const Token& t = toks[pos++];
  if (t.text == ")") throw Error("line " + std::to_string(t.line) + ": unexpected ')'");
  SExpr e;
  e.line = t.line;
  if (t.text != "(") {
    e.atom = t.text;
    return e;
  }
  e.is_list = true;
  while (true) {
    if (pos >= toks.size()) {
      throw Error("line " + std::to_string(t.line) + ": unbalanced '('");
    }
    if (toks[pos].text == ")") {
      ++pos;
      return e;
    }
    e.items.push_back(parse_sexpr(toks, pos));
  }
}

std::vector<SExpr> parse_all(std::string_view text) {
  const auto toks = tokenize(text);
  std::vector<SExpr> out;
  std::size_t pos = 0;
  while (pos < toks.size()) out.push_back(parse_sexpr(toks, pos));
  return out;
}

SExpr parse_single(std::string_view text, const char* what) {
  auto all = parse_all(text);
  if (all.size() != 1 || !all[0].is_list || all[0].head() != "define") {
    throw Error(std::string("expected a single (define ...) ") + what);
  }
  return std::move(all[0]);
}

// Typed list: `a b - t c - u d` (untyped entries default to object).
std::vector<TypedName> typed_list(const std::vector<SExpr>& items, std::size_t begin) {
  std::vector<TypedName> out;
  std::size_t pending = 0;
  for (std::size_t i = begin; i < items.size(); ++i) {
    const SExpr& e = items[i];
    if (e.is_list) {
      if (e.head() == "either") throw UnsupportedFeature("either", e.line);
      throw Error("line " + std::to_string(e.line) + ": unexpected list in typed list");
    }
    if (e.atom == "-") {
      if (i + 1 >= items.size() || items[i + 1].is_list) {
        throw Error("line " + std::to_string(e.line) + ": '-' must be followed by a type");
      }
      const std::string& type = items[i + 1].atom;
      for (std::size_t k = out.size() - pending; k < out.size(); ++k) out[k].type = type;
      pending = 0;
      ++i;
      continue;
    }
    out.push_back({e.atom, "object"});
    ++pending;
  }
  return out;
}

const std::set<std::string>& unsupported_heads() {
  static const std::set<std::string> s{
      "or",       "forall",   "exists",   "imply",   "when",     "=",
      "<",        ">",        "<=",       ">=",      "increase", "decrease",
      "assign",   "scale-up", "scale-down", "preference"};
  return s;
}

// `at` and `over` are also ordinary predicate names; they are temporal only
// as `(at start ...)`, `(at end ...)`, `(over all ...)` or a timed literal.
bool temporal_qualifier(const SExpr& e) {
  const std::string& h = e.head();
  if ((h != "at" && h != "over") || e.items.size() < 2 || e.items[1].is_list) return false;
  const std::string& q = e.items[1].atom;
  if (q == "start" || q == "end" || q == "all") return true;
  return !q.empty() && (std::isdigit(static_cast<unsigned char>(q[0])) != 0 || q[0] == '.');
}

void reject_unsupported(const SExpr& e, bool negation_allowed) {
  const std::string& h = e.head();
  if (unsupported_heads().count(h) != 0) throw UnsupportedFeature(h, e.line);
  if (temporal_qualifier(e)) throw UnsupportedFeature(h + " " + e.items[1].atom, e.line);
  if (h == "not" && !negation_allowed) throw UnsupportedFeature("not (negative precondition)", e.line);
}

Atom to_atom(const SExpr& e) {
  if (!e.is_list || e.items.empty() || e.items[0].is_list) {
    throw Error("line " + std::to_string(e.line) + ": malformed atom");
  }
  Atom a;
  a.predicate = e.items[0].atom;
  a.line = e.line;
  for (std::size_t i = 1; i < e.items.size(); ++i) {
    if (e.items[i].is_list) {
      throw UnsupportedFeature("nested term", e.items[i].line);
    }
    a.args.push_back(e.items[i].atom);
  }
  return a;
}

// Positive conjunction: `()`, `(and ...)` or a single atom.
std::vector<Atom> conjunction(const SExpr& e) {
  std::vector<Atom> out;
  if (!e.is_list) throw Error("line " + std::to_string(e.line) + ": expected a formula");
  if (e.items.empty()) return out;
  reject_unsupported(e, false);
  if (e.head() == "and") {
    for (std::size_t i = 1; i < e.items.size(); ++i) {
      const SExpr& c = e.items[i];
      if (!c.is_list) throw Error("line " + std::to_string(c.line) + ": expected an atom");
      reject_unsupported(c, false);
      if (c.head() == "and") {
        auto nested = conjunction(c);
        out.insert(out.end(), nested.begin(), nested.end());
      } else {
        out.push_back(to_atom(c));
      }
    }
    return out;
  }
  out.push_back(to_atom(e));
  return out;
}

void effect_literals(const SExpr& e, std::vector<Atom>& add, std::vector<Atom>& del) {
  if (!e.is_list) throw Error("line " + std::to_string(e.line) + ": expected an effect");
  if (e.items.empty()) return;
  reject_unsupported(e, true);
  if (e.head() == "and") {
    for (std::size_t i = 1; i < e.items.size(); ++i) effect_literals(e.items[i], add, del);
    return;
  }
  if (e.head() == "not") {
    if (e.items.size() != 2 || !e.items[1].is_list) {
      throw Error("line " + std::to_string(e.line) + ": malformed negative effect");
    }
    reject_unsupported(e.items[1], false);
    del.push_back(to_atom(e.items[1]));
    return;
  }
  add.push_back(to_atom(e));
}

std::string canonical(const std::string& head, const std::vector<std::string>& args) {
  std::string s = "(" + head;
  for (const auto& a : args) s += " " + a;
  s += ")";
  return s;
}

void sort_unique(std::vector<int>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

}  // namespace

// ---------------------------------------------------------------------------
// Domain

bool DomainModel::is_subtype(const std::string& type, const std::string& ancestor) const {
  if (ancestor == "object") return true;
  std::string cur = type;
  for (int guard = 0; guard < 1000; ++guard) {
    if (cur == ancestor) return true;
    auto it = type_parent.find(cur);
    if (it == type_parent.end()) return false;
    cur = it->second;
  }
  return false;
}

const PredicateSchema* DomainModel::find_predicate(const std::string& name) const {
  for (const auto& p : predicates) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

namespace {

void check_type_known(const DomainModel& d, const std::string& type, std::size_t line) {
  if (type == "object" || d.type_parent.count(type) != 0) return;
  throw TypeError("line " + std::to_string(line) + ": undeclared type '" + type + "'");
}

void check_schema_atom(const DomainModel& d, const Atom& a,
                       const std::vector<TypedName>& params) {
  const PredicateSchema* p = d.find_predicate(a.predicate);
  if (p == nullptr) {
    throw TypeError("line " + std::to_string(a.line) + ": undeclared predicate '" +
                    a.predicate + "'");
  }
  if (p->params.size() != a.args.size()) {
    throw TypeError("line " + std::to_string(a.line) + ": predicate '" + a.predicate +
                    "' expects " + std::to_string(p->params.size()) + " arguments, got " +
                    std::to_string(a.args.size()));
  }
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    const std::string& arg = a.args[i];
    std::string type;
    if (!arg.empty() && arg[0] == '?') {
      auto it = std::find_if(params.begin(), params.end(),
                             [&](const TypedName& t) { return t.name == arg; });
      if (it == params.end()) {
        throw TypeError("line " + std::to_string(a.line) + ": unbound variable '" + arg + "'");
      }
      type = it->type;
    } else {
      auto it = std::find_if(d.constants.begin(), d.constants.end(),
                             [&](const TypedName& t) { return t.name == arg; });
      if (it == d.constants.end()) {
        throw TypeError("line " + std::to_string(a.line) + ": undeclared constant '" + arg + "'");
      }
      type = it->type;
    }
    if (!d.is_subtype(type, p->params[i].type)) {
      throw TypeError("line " + std::to_string(a.line) + ": argument '" + arg + "' of type '" +
                      type + "' does not match '" + p->params[i].type + "' in '" +
                      a.predicate + "'");
    }
  }
}

}  // namespace

DomainModel parse_domain(std::string_view text) {
  const SExpr root = parse_single(text, "domain");
  DomainModel d;
  for (std::size_t i = 1; i < root.items.size(); ++i) {
    const SExpr& sec = root.items[i];
    if (!sec.is_list || sec.items.empty()) {
      throw Error("line " + std::to_string(sec.line) + ": malformed domain section");
    }
    const std::string& h = sec.head();
    if (h == "domain") {
      if (sec.items.size() >= 2) d.name = sec.items[1].atom;
    } else if (h == ":requirements") {
      // Constructs are rejected where they are used.
    } else if (h == ":types") {
      for (const auto& t : typed_list(sec.items, 1)) {
        if (t.name != "object") d.type_parent[t.name] = t.type;
      }
    } else if (h == ":constants") {
      for (auto& c : typed_list(sec.items, 1)) d.constants.push_back(std::move(c));
    } else if (h == ":predicates") {
      for (std::size_t k = 1; k < sec.items.size(); ++k) {
        const SExpr& p = sec.items[k];
        if (!p.is_list || p.items.empty() || p.items[0].is_list) {
          throw Error("line " + std::to_string(p.line) + ": malformed predicate");
        }
        d.predicates.push_back({p.items[0].atom, typed_list(p.items, 1)});
      }
    } else if (h == ":action") {
      if (sec.items.size() < 2 || sec.items[1].is_list) {
        throw Error("line " + std::to_string(sec.line) + ": action without name");
      }
      ActionSchema a;
      a.name = sec.items[1].atom;
      for (std::size_t k = 2; k + 1 < sec.items.size(); k += 2) {
        const SExpr& key = sec.items[k];
        const SExpr& val = sec.items[k + 1];
        if (key.is(":parameters")) {
          if (!val.is_list) throw Error("line " + std::to_string(val.line) + ": bad :parameters");
          a.params = typed_list(val.items, 0);
        } else if (key.is(":precondition")) {
          a.precondition = conjunction(val);
        } else if (key.is(":effect")) {
          effect_literals(val, a.add, a.del);
        } else {
          throw UnsupportedFeature(key.is_list ? "list" : key.atom, key.line);
        }
      }
      d.actions.push_back(std::move(a));
    } else if (h == ":functions" || h == ":derived" || h == ":durative-action" ||
               h == ":constraints") {
      throw UnsupportedFeature(h, sec.line);
    } else {
      throw UnsupportedFeature(h, sec.line);
    }
  }

  for (const auto& [child, parent] : d.type_parent) check_type_known(d, parent, root.line);
  for (const auto& c : d.constants) check_type_known(d, c.type, root.line);
  for (const auto& p : d.predicates) {
    for (const auto& t : p.params) check_type_known(d, t.type, root.line);
  }
  for (const auto& a : d.actions) {
    for (const auto& t : a.params) check_type_known(d, t.type, root.line);
    for (const auto& at : a.precondition) check_schema_atom(d, at, a.params);
    for (const auto& at : a.add) check_schema_atom(d, at, a.params);
    for (const auto& at : a.del) check_schema_atom(d, at, a.params);
  }
  return d;
}

// ---------------------------------------------------------------------------
// Problem + grounding

int GroundProblem::fact_id(const std::string& c) const {
  auto it = fact_index.find(c);
  return it == fact_index.end() ? -1 : it->second;
}

int GroundProblem::action_id(const std::string& c) const {
  auto it = action_index.find(c);
  return it == action_index.end() ? -1 : it->second;
}

std::string GroundProblem::state_string(const GroundState& s) const {
  std::string out = "{";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ", ";
    out += facts[static_cast<std::size_t>(s[i])];
  }
  return out + "}";
}

namespace {

// Cartesian product over per-parameter object lists.
void for_each_binding(const std::vector<std::vector<std::string>>& domains,
                      const std::function<void(const std::vector<std::string>&)>& fn) {
  std::vector<std::string> cur(domains.size());
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == domains.size()) {
      fn(cur);
      return;
    }
    for (const auto& o : domains[i]) {
      cur[i] = o;
      rec(i + 1);
    }
  };
  for (const auto& dom : domains) {
    if (dom.empty()) return;
  }
  rec(0);
}

GroundState ground_facts(const GroundProblem& gp, const std::vector<Atom>& atoms,
                         const std::function<std::string(const Atom&)>& name_of) {
  GroundState out;
  for (const auto& a : atoms) {
    const std::string c = name_of(a);
    const int id = gp.fact_id(c);
    if (id < 0) throw TypeError("line " + std::to_string(a.line) + ": fact " + c + " is not in the universe");
    out.push_back(id);
  }
  sort_unique(out);
  return out;
}

}  // namespace

GroundProblem parse_problem(std::string_view text, const DomainModel& domain) {
  const SExpr root = parse_single(text, "problem");
  GroundProblem gp;
  std::vector<TypedName> objects = domain.constants;
  const SExpr* init = nullptr;
  const SExpr* goal = nullptr;

  for (std::size_t i = 1; i < root.items.size(); ++i) {
    const SExpr& sec = root.items[i];
    if (!sec.is_list || sec.items.empty()) {
      throw Error("line " + std::to_string(sec.line) + ": malformed problem section");
    }
    const std::string& h = sec.head();
    if (h == "problem") {
      if (sec.items.size() >= 2) gp.name = sec.items[1].atom;
    } else if (h == ":domain" || h == ":requirements") {
    } else if (h == ":objects") {
      for (auto& o : typed_list(sec.items, 1)) {
        check_type_known(domain, o.type, sec.line);
        objects.push_back(std::move(o));
      }
    } else if (h == ":init") {
      init = &sec;
    } else if (h == ":goal") {
      goal = &sec;
    } else {
      throw UnsupportedFeature(h, sec.line);
    }
  }

  std::map<std::string, std::string> object_type;
  for (const auto& o : objects) object_type[o.name] = o.type;
  auto objects_of = [&](const std::string& type) {
    std::vector<std::string> out;
    for (const auto& [name, t] : object_type) {
      if (domain.is_subtype(t, type)) out.push_back(name);
    }
    return out;  // sorted by name (std::map order)
  };

  // Fact universe.
  std::vector<std::string> facts;
  for (const auto& p : domain.predicates) {
    std::vector<std::vector<std::string>> doms;
    for (const auto& t : p.params) doms.push_back(objects_of(t.type));
    if (p.params.empty()) {
      facts.push_back(canonical(p.name, {}));
      continue;
    }
    for_each_binding(doms, [&](const std::vector<std::string>& b) { facts.push_back(canonical(p.name, b)); });
  }
  std::sort(facts.begin(), facts.end());
  facts.erase(std::unique(facts.begin(), facts.end()), facts.end());
  gp.facts = std::move(facts);
  for (std::size_t i = 0; i < gp.facts.size(); ++i) gp.fact_index[gp.facts[i]] = static_cast<int>(i);

  // Ground atoms given in the problem: arguments must be declared objects.
  auto ground_name = [&](const Atom& a) {
    const PredicateSchema* p = domain.find_predicate(a.predicate);
    if (p == nullptr) {
      throw TypeError("line " + std::to_string(a.line) + ": undeclared predicate '" + a.predicate + "'");
    }
    if (p->params.size() != a.args.size()) {
      throw TypeError("line " + std::to_string(a.line) + ": arity mismatch for '" + a.predicate + "'");
    }
    for (std::size_t i = 0; i < a.args.size(); ++i) {
      auto it = object_type.find(a.args[i]);
      if (it == object_type.end()) {
        throw TypeError("line " + std::to_string(a.line) + ": undeclared object '" + a.args[i] + "'");
      }
      if (!domain.is_subtype(it->second, p->params[i].type)) {
        throw TypeError("line " + std::to_string(a.line) + ": object '" + a.args[i] +
                        "' has type '" + it->second + "', expected '" + p->params[i].type + "'");
      }
    }
    return canonical(a.predicate, a.args);
  };

  if (init != nullptr) {
    std::vector<Atom> atoms;
    for (std::size_t k = 1; k < init->items.size(); ++k) {
      const SExpr& e = init->items[k];
      if (!e.is_list) throw Error("line " + std::to_string(e.line) + ": expected an atom in :init");
      reject_unsupported(e, false);
      atoms.push_back(to_atom(e));
    }
    gp.init = ground_facts(gp, atoms, ground_name);
  }
  if (goal != nullptr) {
    if (goal->items.size() != 2) throw Error("line " + std::to_string(goal->line) + ": malformed :goal");
    gp.goal = ground_facts(gp, conjunction(goal->items[1]), ground_name);
  }

  // Actions.
  std::vector<GroundAction> actions;
  for (const auto& schema : domain.actions) {
    std::vector<std::vector<std::string>> doms;
    for (const auto& t : schema.params) doms.push_back(objects_of(t.type));
    auto bind = [&](const std::vector<std::string>& b) {
      auto name_of = [&](const Atom& a) {
        std::vector<std::string> args;
        for (const auto& arg : a.args) {
          if (!arg.empty() && arg[0] == '?') {
            for (std::size_t i = 0; i < schema.params.size(); ++i) {
              if (schema.params[i].name == arg) {
                args.push_back(b[i]);
                break;
              }
            }
          } else {
            args.push_back(arg);
          }
        }
        return canonical(a.predicate, args);
      };
      GroundAction ga;
      ga.name = canonical(schema.name, b);
      ga.pre = ground_facts(gp, schema.precondition, name_of);
      ga.add = ground_facts(gp, schema.add, name_of);
      ga.del = ground_facts(gp, schema.del, name_of);
      actions.push_back(std::move(ga));
    };
    if (schema.params.empty()) {
      bind({});
    } else {
      for_each_binding(doms, bind);
    }
  }
  std::sort(actions.begin(), actions.end(),
            [](const GroundAction& a, const GroundAction& b) { return a.name < b.name; });
  gp.actions = std::move(actions);
  for (std::size_t i = 0; i < gp.actions.size(); ++i) gp.action_index[gp.actions[i].name] = static_cast<int>(i);
  return gp;
}

// ---------------------------------------------------------------------------
// Progression

bool satisfies(const GroundState& s, const GroundState& goal) {
  return std::includes(s.begin(), s.end(), goal.begin(), goal.end());
}

GroundState apply(const GroundState& s, const GroundAction& a) {
  if (!satisfies(s, a.pre)) throw InapplicableAction(a.name, 1);
  GroundState kept;
  kept.reserve(s.size() + a.add.size());
  std::set_difference(s.begin(), s.end(), a.del.begin(), a.del.end(), std::back_inserter(kept));
  GroundState out;
  out.reserve(kept.size() + a.add.size());
  std::set_union(kept.begin(), kept.end(), a.add.begin(), a.add.end(), std::back_inserter(out));
  return out;
}

std::vector<int> applicable_actions(const GroundProblem& p, const GroundState& s) {
  std::vector<int> out;
  for (std::size_t i = 0; i < p.actions.size(); ++i) {
    if (satisfies(s, p.actions[i].pre)) out.push_back(static_cast<int>(i));
  }
  return out;
}

StateTrajectory rollout(const GroundProblem& p, const Plan& plan) {
  StateTrajectory traj{p.init};
  traj.reserve(plan.actions.size() + 1);
  for (std::size_t i = 0; i < plan.actions.size(); ++i) {
    const GroundAction& a = p.actions.at(static_cast<std::size_t>(plan.actions[i]));
    if (!satisfies(traj.back(), a.pre)) throw InapplicableAction(a.name, i + 1);
    traj.push_back(strips::apply(traj.back(), a));
  }
  return traj;
}

std::vector<GroundState> observed_states(const GroundProblem& p,
                                         std::span<const int> observed_actions) {
  Plan plan{std::vector<int>(observed_actions.begin(), observed_actions.end())};
  StateTrajectory traj = rollout(p, plan);
  return {traj.begin() + 1, traj.end()};
}

// ---------------------------------------------------------------------------
// Top-k enumeration

namespace {

struct StateHash {
  std::size_t operator()(const GroundState& s) const {
    std::size_t h = 1469598103934665603ULL;
    for (int f : s) {
      h ^= static_cast<std::size_t>(f) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return h;
  }
};

class StateSpace {
 public:
  explicit StateSpace(const GroundProblem& p) : p_(p) {}

  int intern(const GroundState& s) {
    auto [it, fresh] = ids_.try_emplace(s, static_cast<int>(states_.size()));
    if (fresh) {
      states_.push_back(s);
      succ_.emplace_back();
      expanded_.push_back(false);
    }
    return it->second;
  }

  const GroundState& state(int id) const { return states_[static_cast<std::size_t>(id)]; }
  std::size_t size() const { return states_.size(); }

  // (action, next state) pairs in action-id order.
  const std::vector<std::pair<int, int>>& successors(int id) {
    if (!expanded_[static_cast<std::size_t>(id)]) {
      std::vector<std::pair<int, int>> out;
      const GroundState s = states_[static_cast<std::size_t>(id)];
      for (int a : applicable_actions(p_, s)) {
        out.emplace_back(a, intern(strips::apply(s, p_.actions[static_cast<std::size_t>(a)])));
      }
      succ_[static_cast<std::size_t>(id)] = std::move(out);
      expanded_[static_cast<std::size_t>(id)] = true;
    }
    return succ_[static_cast<std::size_t>(id)];
  }

 private:
  const GroundProblem& p_;
  std::unordered_map<GroundState, int, StateHash> ids_;
  std::vector<GroundState> states_;
  std::vector<std::vector<std::pair<int, int>>> succ_;
  std::vector<bool> expanded_;
};

constexpr int kUnreachable = std::numeric_limits<int>::max();

}  // namespace

std::vector<Plan> topk_plans(const GroundProblem& p, const GroundState& goal, int k,
                             const TopkOptions& opts) {
  PlannerCalls::record();
  if (k < 1) throw Error("k must be positive");

  StateSpace space(p);
  const int root = space.intern(p.init);

  // Forward exploration of the reachable graph, up to the cap.
  bool complete = true;
  {
    std::deque<int> queue{root};
    std::vector<bool> seen{true};
    while (!queue.empty()) {
      const int s = queue.front();
      queue.pop_front();
      for (const auto& [a, t] : space.successors(s)) {
        if (static_cast<std::size_t>(t) >= seen.size()) seen.resize(static_cast<std::size_t>(t) + 1, false);
        if (!seen[static_cast<std::size_t>(t)]) {
          seen[static_cast<std::size_t>(t)] = true;
          queue.push_back(t);
        }
      }
      if (space.size() > opts.max_states) {
        complete = false;
        break;
      }
    }
  }

  // Exact goal distance by backward BFS when the graph is complete.
  std::vector<int> h;
  if (complete) {
    const std::size_t n = space.size();
    std::vector<std::vector<int>> pred(n);
    bool any_goal = false;
    h.assign(n, kUnreachable);
    std::deque<int> queue;
    for (std::size_t s = 0; s < n; ++s) {
      for (const auto& [a, t] : space.successors(static_cast<int>(s))) {
        pred[static_cast<std::size_t>(t)].push_back(static_cast<int>(s));
      }
      if (satisfies(space.state(static_cast<int>(s)), goal)) {
        h[s] = 0;
        queue.push_back(static_cast<int>(s));
        any_goal = true;
      }
    }
    if (!any_goal) throw Unsolvable("goal " + p.state_string(goal) + " is unreachable");
    while (!queue.empty()) {
      const int s = queue.front();
      queue.pop_front();
      for (int q : pred[static_cast<std::size_t>(s)]) {
        if (h[static_cast<std::size_t>(q)] == kUnreachable) {
          h[static_cast<std::size_t>(q)] = h[static_cast<std::size_t>(s)] + 1;
          queue.push_back(q);
        }
      }
    }
  }
  auto heuristic = [&](int s) {
    return complete ? h[static_cast<std::size_t>(s)] : 0;
  };

  struct Node {
    int state;
    int parent;
    int action;
    int g;
  };
  std::vector<Node> nodes;
  using Entry = std::tuple<int, std::size_t, int>;  // f, seq, node
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  std::size_t seq = 0;
  if (heuristic(root) == kUnreachable) throw Unsolvable("goal " + p.state_string(goal) + " is unreachable");
  nodes.push_back({root, -1, -1, 0});
  open.emplace(heuristic(root), seq++, 0);

  auto on_path = [&](int node, int state) {
    for (int n = node; n >= 0; n = nodes[static_cast<std::size_t>(n)].parent) {
      if (nodes[static_cast<std::size_t>(n)].state == state) return true;
    }
    return false;
  };

  std::vector<Plan> plans;
  std::size_t expansions = 0;
  while (!open.empty() && static_cast<int>(plans.size()) < k) {
    const auto [f, order, id] = open.top();
    open.pop();
    const Node node = nodes[static_cast<std::size_t>(id)];
    if (satisfies(space.state(node.state), goal)) {
      Plan plan;
      for (int n = id; nodes[static_cast<std::size_t>(n)].parent >= 0; n = nodes[static_cast<std::size_t>(n)].parent) {
        plan.actions.push_back(nodes[static_cast<std::size_t>(n)].action);
      }
      std::reverse(plan.actions.begin(), plan.actions.end());
      plans.push_back(std::move(plan));
      if (static_cast<int>(plans.size()) == k) break;
    }
    if (++expansions > opts.max_expansions) break;
    for (const auto& [a, t] : space.successors(node.state)) {
      const int ht = heuristic(t);
      if (ht == kUnreachable || on_path(id, t)) continue;
      nodes.push_back({t, id, a, node.g + 1});
      open.emplace(node.g + 1 + ht, seq++, static_cast<int>(nodes.size()) - 1);
    }
  }

  if (plans.empty()) throw Unsolvable("no plan found for goal " + p.state_string(goal));
  if (opts.optimal_only) {
    const std::size_t best = plans.front().cost();
    plans.erase(std::find_if(plans.begin(), plans.end(),
                             [&](const Plan& pl) { return pl.cost() > best; }),
                plans.end());
  }
  return plans;
}

// ---------------------------------------------------------------------------
// Text formats

namespace {

std::string canonical_from_sexpr(const SExpr& e) {
  const Atom a = to_atom(e);
  return canonical(a.predicate, a.args);
}

}  // namespace

std::vector<GroundState> parse_hypotheses(std::string_view text, const GroundProblem& p) {
  std::vector<GroundState> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto exprs = parse_all(line);
    if (exprs.empty()) continue;
    std::vector<const SExpr*> atoms;
    for (const auto& e : exprs) {
      if (e.head() == "and") {
        for (std::size_t i = 1; i < e.items.size(); ++i) atoms.push_back(&e.items[i]);
      } else {
        atoms.push_back(&e);
      }
    }
    GroundState g;
    for (const SExpr* e : atoms) {
      if (!e->is_list) throw Error("hypotheses line " + std::to_string(line_no) + ": expected a fact");
      reject_unsupported(*e, false);
      const std::string c = canonical_from_sexpr(*e);
      const int id = p.fact_id(c);
      if (id < 0) throw TypeError("hypotheses line " + std::to_string(line_no) + ": unknown fact " + c);
      g.push_back(id);
    }
    sort_unique(g);
    out.push_back(std::move(g));
  }
  return out;
}

std::vector<int> parse_observations(std::string_view text, const GroundProblem& p) {
  std::vector<int> out;
  for (const auto& e : parse_all(text)) {
    if (!e.is_list) throw Error("line " + std::to_string(e.line) + ": expected (action args...)");
    const std::string c = canonical_from_sexpr(e);
    const int id = p.action_id(c);
    if (id < 0) throw TypeError("line " + std::to_string(e.line) + ": unknown action " + c);
    out.push_back(id);
  }
  return out;
}

void write_plan(std::ostream& os, const GroundProblem& p, const Plan& plan) {
  for (int a : plan.actions) os << p.actions[static_cast<std::size_t>(a)].name << '\n';
  os << "; cost = " << plan.cost() << '\n';
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace goalrec::strips

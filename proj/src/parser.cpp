#include "auditlog/parser.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace auditlog {

namespace {

enum class Tok {
  Ident,
  Number,
  Money,
  LParen,
  RParen,
  LBracket,
  RBracket,
  LBrace,
  RBrace,
  Comma,
  Dot,
  Colon,
  Semi,
  Equal,
  Dollar,
  Bang,
  Question,
  Star,
  Arrow,
  End,
};

struct Token {
  Tok type = Tok::End;
  std::string text;
  std::uint64_t num = 0;
  SourcePos pos;
};

const char* tok_name(Tok t) {
  switch (t) {
    case Tok::Ident: return "identifier";
    case Tok::Number: return "number";
    case Tok::Money: return "money literal";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBracket: return "'['";
    case Tok::RBracket: return "']'";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::Comma: return "','";
    case Tok::Dot: return "'.'";
    case Tok::Colon: return "':'";
    case Tok::Semi: return "';'";
    case Tok::Equal: return "'='";
    case Tok::Dollar: return "'$'";
    case Tok::Bang: return "'!'";
    case Tok::Question: return "'?'";
    case Tok::Star: return "'*'";
    case Tok::Arrow: return "'->'";
    case Tok::End: return "end of input";
  }
  return "?";
}

std::vector<Token> lex(std::string_view text, const std::string& file) {
  std::vector<Token> out;
  std::uint32_t line = 1, col = 1;
  std::size_t i = 0;
  auto pos = [&]() { return SourcePos{line, col}; };
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (text[i + k] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    i += n;
  };
  while (i < text.size()) {
    char c = text[i];
    if (c == '#') {
      std::size_t n = 0;
      while (i + n < text.size() && text[i + n] != '\n') ++n;
      advance(n);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    SourcePos p = pos();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t n = 0;
      while (i + n < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[i + n])) || text[i + n] == '_'))
        ++n;
      while (i + n < text.size() && text[i + n] == '\'') ++n;
      out.push_back(Token{Tok::Ident, std::string(text.substr(i, n)), 0, p});
      advance(n);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t n = 0;
      while (i + n < text.size() && std::isdigit(static_cast<unsigned char>(text[i + n]))) ++n;
      if (i + n < text.size() && text[i + n] == '$') {
        out.push_back(Token{Tok::Money, std::string(text.substr(i, n + 1)), 0, p});
        advance(n + 1);
      } else {
        Token t{Tok::Number, std::string(text.substr(i, n)), 0, p};
        t.num = std::stoull(t.text);
        out.push_back(t);
        advance(n);
      }
      continue;
    }
    if (c == '-' && i + 1 < text.size() && text[i + 1] == '>') {
      out.push_back(Token{Tok::Arrow, "->", 0, p});
      advance(2);
      continue;
    }
    Tok type;
    switch (c) {
      case '(': type = Tok::LParen; break;
      case ')': type = Tok::RParen; break;
      case '[': type = Tok::LBracket; break;
      case ']': type = Tok::RBracket; break;
      case '{': type = Tok::LBrace; break;
      case '}': type = Tok::RBrace; break;
      case ',': type = Tok::Comma; break;
      case '.': type = Tok::Dot; break;
      case ':': type = Tok::Colon; break;
      case ';': type = Tok::Semi; break;
      case '=': type = Tok::Equal; break;
      case '$': type = Tok::Dollar; break;
      case '!': type = Tok::Bang; break;
      case '?': type = Tok::Question; break;
      case '*': type = Tok::Star; break;
      default:
        throw ParseError(file, p, std::string("unexpected character '") + c + "'");
    }
    out.push_back(Token{type, std::string(1, c), 0, p});
    advance(1);
  }
  out.push_back(Token{Tok::End, "", 0, pos()});
  return out;
}

class Parser {
 public:
  Parser(std::string_view text, std::string file)
      : file_(std::move(file)), toks_(lex(text, file_)) {
    script_.source = file_;
  }

  ScenarioScript parse_file() {
    while (!at(Tok::End)) {
      expect(Tok::LBracket);
      Token name = expect_ident();
      expect(Tok::RBracket);
      std::string section = name.text;
      if (section == "agents")
        parse_agents();
      else if (section == "data")
        parse_data();
      else if (section == "predicates")
        parse_predicates();
      else if (section == "actions")
        parse_actions();
      else if (section == "policies")
        parse_policies();
      else if (section == "env")
        parse_env();
      else if (section == "proofs")
        parse_proofs();
      else if (section == "steps")
        parse_steps();
      else if (section == "audits")
        parse_audits();
      else
        fail(name.pos, "unknown section [" + section + "]");
    }
    return std::move(script_);
  }

  // entry points for tests / tooling
  PolicyRef parse_single_policy(const ScenarioScript& context) {
    script_ = clone_decls(context);
    PolicyRef p = parse_policy();
    expect(Tok::End);
    return p;
  }

  ActionTemplate parse_single_action(const ScenarioScript& context) {
    script_ = clone_decls(context);
    ActionTemplate a = parse_action();
    expect(Tok::End);
    return a;
  }

 private:
  std::string file_;
  std::vector<Token> toks_;
  std::size_t at_ = 0;
  ScenarioScript script_;

  // scopes used while parsing policies
  std::vector<Term> binders_;
  std::map<std::string, Term> formals_;
  std::string payload_formal_;
  std::map<std::string, std::vector<Term>> free_seen_;  // name -> annotated sorts seen

  static ScenarioScript clone_decls(const ScenarioScript& context) {
    ScenarioScript s;
    s.source = context.source;
    s.agents = context.agents;
    s.data = context.data;
    s.sigs = context.sigs;
    s.registry = context.registry;
    s.policies = context.policies;
    return s;
  }

  [[noreturn]] void fail(SourcePos pos, const std::string& msg) { throw ParseError(file_, pos, msg); }

  const Token& peek(std::size_t ahead = 0) const {
    std::size_t k = at_ + ahead;
    return k < toks_.size() ? toks_[k] : toks_.back();
  }
  bool at(Tok t) const { return peek().type == t; }
  bool at_kw(const char* kw) const { return at(Tok::Ident) && peek().text == kw; }
  Token take() { return toks_[std::min(at_++, toks_.size() - 1)]; }
  Token expect(Tok t) {
    if (!at(t)) fail(peek().pos, std::string("expected ") + tok_name(t) + ", found '" + peek().text + "'");
    return take();
  }
  Token expect_ident() { return expect(Tok::Ident); }
  Token expect_kw(const char* kw) {
    if (!at_kw(kw)) fail(peek().pos, std::string("expected '") + kw + "', found '" + peek().text + "'");
    return take();
  }
  bool accept(Tok t) {
    if (!at(t)) return false;
    take();
    return true;
  }
  bool accept_kw(const char* kw) {
    if (!at_kw(kw)) return false;
    take();
    return true;
  }

  bool at_section() const { return at(Tok::LBracket); }

  static bool is_section_or_end(const Token& t) { return t.type == Tok::LBracket || t.type == Tok::End; }

  // Free-variable annotations are scoped to one top-level expression.
  PolicyRef parse_policy_top() {
    free_seen_.clear();
    return parse_policy();
  }
  ActionTemplate parse_action_top() {
    free_seen_.clear();
    return parse_action();
  }

  bool is_agent(const std::string& n) const {
    for (const auto& a : script_.agents)
      if (a.name == n) return true;
    return false;
  }
  bool is_data(const std::string& n) const {
    for (const auto& d : script_.data)
      if (d.name == n) return true;
    return false;
  }

  // -- sections ------------------------------------------------------------

  void parse_agents() {
    while (at(Tok::Ident)) {
      Token t = take();
      if (is_agent(t.text) || is_data(t.text)) fail(t.pos, "duplicate name: " + t.text);
      script_.agents.push_back(AgentId{t.text});
      accept(Tok::Comma);
    }
  }

  void parse_data() {
    while (at(Tok::Ident)) {
      Token t = take();
      if (is_agent(t.text) || is_data(t.text)) fail(t.pos, "duplicate name: " + t.text);
      script_.data.push_back(DataId{t.text});
      accept(Tok::Comma);
    }
  }

  Sort parse_sort(bool allow_money, bool allow_policy, bool* is_policy = nullptr) {
    Token t = expect_ident();
    if (is_policy) *is_policy = false;
    if (t.text == "agent") return Sort::Agent;
    if (t.text == "data") return Sort::Data;
    if (t.text == "money" && allow_money) return Sort::Money;
    if (t.text == "policy" && allow_policy) {
      *is_policy = true;
      return Sort::Agent;  // unused
    }
    fail(t.pos, "unknown sort '" + t.text + "'" +
                    (t.text == "policy" ? " (quantification over policies is not allowed)" : ""));
  }

  void parse_predicates() {
    while (at_kw("predicate")) {
      take();
      Token name = expect_ident();
      expect(Tok::LParen);
      PredicateSignature sig;
      sig.name = name.text;
      if (!at(Tok::RParen)) {
        do {
          Sort s = parse_sort(true, false);
          if (accept(Tok::Star)) {
            if (s != Sort::Data) fail(peek().pos, "only data arguments can be marked affected");
            sig.affected_data.push_back(sig.arg_sorts.size());
          }
          sig.arg_sorts.push_back(s);
        } while (accept(Tok::Comma));
      }
      expect(Tok::RParen);
      try {
        script_.sigs.add(std::move(sig));
      } catch (const Error& e) {
        fail(name.pos, e.what());
      }
    }
  }

  void parse_actions() {
    while (at_kw("action")) {
      take();
      Token name = expect_ident();
      ActionKindSpec spec;
      spec.name = name.text;
      expect(Tok::LParen);
      if (!at(Tok::RParen)) {
        do {
          Token formal = expect_ident();
          expect(Tok::Colon);
          bool is_policy = false;
          Sort s = parse_sort(true, true, &is_policy);
          if (is_policy) {
            if (spec.has_payload) fail(formal.pos, "an action kind takes at most one policy argument");
            spec.has_payload = true;
            spec.payload_formal = formal.text;
          } else {
            if (spec.has_payload) fail(formal.pos, "the policy argument must come last");
            spec.arg_sorts.push_back(s);
          }
          spec.formals.push_back(formal.text);
        } while (accept(Tok::Comma));
      }
      expect(Tok::RParen);
      expect(Tok::LBrace);
      formals_.clear();
      payload_formal_ = spec.payload_formal;
      for (std::size_t k = 0; k < spec.arg_sorts.size(); ++k)
        formals_.emplace(spec.formals[k], Term::var(spec.formals[k], spec.arg_sorts[k]));
      while (!accept(Tok::RBrace)) {
        Token clause = expect_ident();
        if (clause.text == "obs") {
          expect(Tok::Equal);
          Token what = expect_ident();
          if (what.text == "actor")
            spec.obs = ObsRule{ObsForm::ActorOnly, {}};
          else if (what.text == "endpoints")
            spec.obs = ObsRule{ObsForm::BothEndpoints, {}};
          else if (what.text == "all")
            spec.obs = ObsRule{ObsForm::AllAgents, {}};
          else if (what.text == "args") {
            ObsRule rule{ObsForm::ExplicitArgs, {}};
            expect(Tok::LParen);
            do rule.positions.push_back(expect(Tok::Number).num);
            while (accept(Tok::Comma));
            expect(Tok::RParen);
            spec.obs = rule;
          } else {
            fail(what.pos, "unknown observer rule '" + what.text + "'");
          }
        } else if (clause.text == "po" || clause.text == "concl") {
          DerivedPolicyRule rule;
          expect(Tok::LParen);
          if (accept(Tok::Star)) {
            rule.for_all_agents = true;
          } else {
            Token subject = expect_ident();
            bool found = false;
            for (std::size_t k = 0; k < spec.arg_sorts.size(); ++k) {
              if (spec.formals[k] == subject.text) {
                rule.agent_arg = k;
                found = true;
              }
            }
            if (!found) fail(subject.pos, "unknown parameter '" + subject.text + "'");
          }
          expect(Tok::RParen);
          expect(Tok::Equal);
          SourcePos start = peek().pos;
          rule.templ = parse_policy_top();
          try {
            validate_policy(*rule.templ, script_.sigs, script_.registry, /*allow_holes=*/true);
          } catch (const Error& e) {
            fail(start, e.what());
          }
          if (clause.text == "po")
            spec.po_rule = rule;
          else
            spec.concl_rule = rule;
        } else {
          fail(clause.pos, "unknown clause '" + clause.text + "' in action declaration");
        }
        accept(Tok::Semi);
      }
      formals_.clear();
      payload_formal_.clear();
      try {
        script_.registry.register_kind(std::move(spec));
      } catch (const Error& e) {
        fail(name.pos, e.what());
      }
    }
  }

  void parse_policies() {
    while (at_kw("policy")) {
      take();
      Token name = expect_ident();
      expect(Tok::Equal);
      SourcePos start = peek().pos;
      PolicyRef p = parse_policy_top();
      try {
        validate_policy(*p, script_.sigs, script_.registry);
      } catch (const Error& e) {
        fail(start, e.what());
      }
      if (!script_.policies.emplace(name.text, p).second)
        fail(name.pos, "duplicate policy name: " + name.text);
    }
  }

  void parse_env() {
    while (at_kw("fact")) {
      take();
      SourcePos start = peek().pos;
      free_seen_.clear();
      PolicyRef p = parse_policy_primary();
      auto atom = as_ground_atom(*p);
      if (!atom) fail(start, "environment facts are ground atoms");
      try {
        validate_policy(*p, script_.sigs, script_.registry);
      } catch (const Error& e) {
        fail(start, e.what());
      }
      EnvFact fact;
      fact.atom = *atom;
      if (accept_kw("from")) fact.valid_from = expect(Tok::Number).num;
      if (accept_kw("to")) fact.valid_to = expect(Tok::Number).num;
      script_.env.push_back(std::move(fact));
    }
  }

  void parse_proofs() {
    while (at_kw("proof")) {
      take();
      Token name = expect_ident();
      ProofDecl decl;
      decl.name = name.text;
      decl.pos = name.pos;
      expect_kw("for");
      Token agent = expect_ident();
      if (!is_agent(agent.text)) fail(agent.pos, "unknown agent: " + agent.text);
      decl.sequent.reasoner = AgentId{agent.text};
      expect(Tok::LBrace);
      expect_kw("gamma");
      expect(Tok::Colon);
      while (!at_kw("delta")) {
        decl.sequent.gamma.push_back(parse_gamma_item());
        if (!accept(Tok::Semi)) break;
      }
      expect_kw("delta");
      expect(Tok::Colon);
      while (!at_kw("goal")) {
        decl.sequent.delta.push_back(parse_delta_item());
        if (!accept(Tok::Semi)) break;
      }
      expect_kw("goal");
      expect(Tok::Colon);
      decl.sequent.goal = parse_policy_top();
      expect_kw("term");
      expect(Tok::Colon);
      if (at_kw("search")) {
        take();
        if (at(Tok::Number)) decl.search_depth = static_cast<int>(take().num);
        else decl.search_depth = 0;  // 0 = use the CLI/default bound
      } else {
        decl.term = parse_proof_term();
      }
      if (accept_kw("witness")) {
        expect(Tok::Colon);
        do {
          ActionTemplate act = parse_action_top();
          expect(Tok::Equal);
          Token id = expect(Tok::Number);
          decl.witnesses[to_text(act)] = id.num;
        } while (accept(Tok::Semi));
      }
      expect(Tok::RBrace);
      for (const auto& p : script_.proofs)
        if (p.name == decl.name) fail(name.pos, "duplicate proof name: " + decl.name);
      script_.proofs.push_back(std::move(decl));
    }
  }

  NonLinItem parse_gamma_item() {
    free_seen_.clear();
    if (accept_kw("act")) return NonLinItem::action(parse_action());
    if (accept(Tok::Question)) {
      expect(Tok::LBracket);
      ActionTemplate a = parse_action();
      expect(Tok::RBracket);
      return NonLinItem::many_oblig(std::move(a));
    }
    if (accept_kw("pol")) return NonLinItem::policy(parse_policy());
    return NonLinItem::policy(parse_policy());
  }

  LinItem parse_delta_item() {
    free_seen_.clear();
    if (accept(Tok::Bang)) {
      expect(Tok::LBracket);
      ActionTemplate a = parse_action();
      expect(Tok::RBracket);
      return LinItem{std::move(a)};
    }
    return LinItem{parse_action()};
  }

  void parse_steps() {
    while (at_kw("step")) {
      Token kw = take();
      ScenarioStep st;
      st.pos = kw.pos;
      st.honest = accept_kw("honest");
      st.action = parse_action_top();
      if (accept(Tok::LBrace)) {
        while (!accept(Tok::RBrace)) {
          if (accept_kw("log")) {
            LogChoice choice;
            Token logger = expect_ident();
            if (!is_agent(logger.text)) fail(logger.pos, "unknown agent: " + logger.text);
            choice.logger = AgentId{logger.text};
            if (accept_kw("conds")) {
              expect(Tok::LBrace);
              while (!accept(Tok::RBrace)) {
                SourcePos start = peek().pos;
                PolicyRef p = parse_policy_primary();
                auto atom = as_ground_atom(*p);
                if (!atom) fail(start, "logged conditions are ground atoms");
                choice.conds.insert(*atom);
                accept(Tok::Semi);
              }
            }
            if (accept_kw("obligs")) {
              expect(Tok::LBrace);
              while (!accept(Tok::RBrace)) {
                ObligationEntry o;
                if (accept(Tok::Bang))
                  o.mode = ObligMode::Once;
                else if (accept(Tok::Question))
                  o.mode = ObligMode::Many;
                else
                  fail(peek().pos, "obligations start with '!' or '?'");
                o.action = parse_action();
                if (accept_kw("ref")) o.ref = expect(Tok::Number).num;
                if (accept_kw("until")) {
                  o.deadline = expect(Tok::Number).num;
                  choice.obligs.insert(std::move(o));
                } else if (accept_kw("within")) {
                  Tick duration = expect(Tok::Number).num;
                  choice.relative_obligs.emplace_back(std::move(o), duration);
                } else {
                  choice.obligs.insert(std::move(o));
                }
                accept(Tok::Semi);
              }
            }
            if (accept_kw("proof")) choice.proof = expect_ident().text;
            st.logs.push_back(std::move(choice));
          } else if (accept_kw("proof")) {
            std::string name = expect_ident().text;
            if (st.honest)
              st.honest_proof = name;
            else
              st.bare_proofs.push_back(name);
          } else {
            fail(peek().pos, "expected 'log' or 'proof' in step block");
          }
          accept(Tok::Semi);
        }
      }
      script_.steps.push_back(std::move(st));
    }
  }

  void parse_audits() {
    while (at_kw("audit")) {
      take();
      AuditDirective d;
      d.name = expect_ident().text;
      expect(Tok::LBrace);
      while (!accept(Tok::RBrace)) {
        Token clause = expect_ident();
        expect(Tok::Colon);
        if (clause.text == "suspects") {
          do {
            Token a = expect_ident();
            if (!is_agent(a.text)) fail(a.pos, "unknown agent: " + a.text);
            d.suspects.push_back(AgentId{a.text});
          } while (accept(Tok::Comma));
        } else if (clause.text == "evidence") {
          if (accept_kw("logs")) {
            d.evidence.kind = EvidenceSpec::Kind::SuspectLogs;
          } else if (accept_kw("all")) {
            d.evidence.kind = EvidenceSpec::Kind::All;
          } else if (accept_kw("sample")) {
            d.evidence.kind = EvidenceSpec::Kind::Sample;
          } else if (accept_kw("ids")) {
            d.evidence.kind = EvidenceSpec::Kind::Ids;
            do d.evidence.ids.push_back(expect(Tok::Number).num);
            while (accept(Tok::Comma));
          } else {
            fail(peek().pos, "expected 'logs', 'all', 'sample' or 'ids'");
          }
        } else if (clause.text == "expect") {
          Token what = expect_ident();
          if (what.text == "pass")
            d.expect_pass = true;
          else if (what.text == "fail")
            d.expect_pass = false;
          else
            fail(what.pos, "expected 'pass' or 'fail'");
        } else {
          fail(clause.pos, "unknown audit clause '" + clause.text + "'");
        }
        accept(Tok::Semi);
      }
      script_.audits.push_back(std::move(d));
    }
  }

  // -- terms, actions, policies ---------------------------------------------

  std::optional<Term> lookup_bound(const std::string& name) const {
    for (auto it = binders_.rbegin(); it != binders_.rend(); ++it)
      if (it->name() == name) return *it;
    return std::nullopt;
  }

  Term parse_term() {
    if (at(Tok::Money)) return Term::money(take().text);
    Token id = expect_ident();
    if (accept(Tok::Colon)) {
      Sort s = parse_sort(false, false);
      // an annotation matching an enclosing binder is that binder
      for (auto it = binders_.rbegin(); it != binders_.rend(); ++it)
        if (it->name() == id.text && it->sort() == s) return *it;
      Term v = Term::var(id.text, s);
      auto& seen = free_seen_[id.text];
      bool known = false;
      for (const auto& t : seen) known = known || t.sort() == s;
      if (!known) seen.push_back(v);
      return v;
    }
    if (auto bound = lookup_bound(id.text)) return *bound;
    auto formal = formals_.find(id.text);
    if (formal != formals_.end()) return formal->second;
    if (is_agent(id.text)) return Term::agent_const(id.text);
    if (is_data(id.text)) return Term::data_const(id.text);
    auto seen = free_seen_.find(id.text);
    if (seen != free_seen_.end()) {
      if (seen->second.size() > 1)
        fail(id.pos, "variable " + id.text + " is used at several sorts; annotate this occurrence");
      return seen->second.front();
    }
    fail(id.pos, "unknown identifier '" + id.text + "'");
  }

  ActionTemplate parse_action() {
    Token name = expect_ident();
    const ActionKindSpec* spec = script_.registry.find(name.text);
    if (!spec) fail(name.pos, "unknown action kind: " + name.text);
    ActionTemplate act;
    act.kind = name.text;
    expect(Tok::LParen);
    for (std::size_t k = 0; k < spec->arg_sorts.size(); ++k) {
      if (k) expect(Tok::Comma);
      act.args.push_back(parse_term());
    }
    if (spec->has_payload) {
      if (!spec->arg_sorts.empty()) expect(Tok::Comma);
      act.payload = parse_policy();
    }
    expect(Tok::RParen);
    return act;
  }

  PolicyRef parse_policy() {
    if (at_kw("forall")) {
      Token kw = take();
      Token var = expect_ident();
      expect(Tok::Colon);
      Sort s = parse_sort(false, false);
      expect(Tok::Dot);
      Term binder = Term::var(var.text, s);
      binders_.push_back(binder);
      PolicyRef body = parse_policy();
      binders_.pop_back();
      (void)kw;
      return Policy::forall(binder, body);
    }
    if (at(Tok::Bang) || at(Tok::Question)) {
      ObligMode mode = take().type == Tok::Bang ? ObligMode::Once : ObligMode::Many;
      expect(Tok::LBracket);
      ActionTemplate act = parse_action();
      expect(Tok::RBracket);
      expect(Tok::Arrow);
      PolicyRef body = parse_policy();
      return Policy::oblig_implies(Requirement{mode, std::move(act)}, body);
    }
    PolicyRef lhs = parse_policy_and();
    if (accept(Tok::Arrow)) {
      PolicyRef rhs = parse_policy();
      return Policy::cond_implies(lhs, rhs);
    }
    return lhs;
  }

  PolicyRef parse_policy_and() {
    PolicyRef lhs = parse_policy_primary();
    while (at_kw("and")) {
      take();
      PolicyRef rhs = parse_policy_primary();
      lhs = Policy::conj(lhs, rhs);
    }
    return lhs;
  }

  PolicyRef parse_policy_primary() {
    if (accept(Tok::LParen)) {
      PolicyRef p = parse_policy();
      expect(Tok::RParen);
      return p;
    }
    if (accept(Tok::Dollar)) {
      Token name = expect_ident();
      auto it = script_.policies.find(name.text);
      if (it == script_.policies.end()) fail(name.pos, "unknown policy: $" + name.text);
      return it->second;
    }
    Token head = expect_ident();
    if (head.text == "owns") {
      expect(Tok::LParen);
      Term owner = parse_term();
      expect(Tok::Comma);
      Term data = parse_term();
      expect(Tok::RParen);
      try {
        return Policy::owns(owner, data);
      } catch (const Error& e) {
        fail(head.pos, e.what());
      }
    }
    if (head.text == "says") {
      expect(Tok::LParen);
      Term speaker = parse_term();
      expect(Tok::Comma);
      PolicyRef body = parse_policy();
      expect(Tok::Comma);
      Term target = parse_term();
      expect(Tok::RParen);
      try {
        return Policy::says_to(speaker, body, target);
      } catch (const Error& e) {
        fail(head.pos, e.what());
      }
    }
    if (at(Tok::LParen)) {
      // atom
      const PredicateSignature* sig = script_.sigs.find(head.text);
      if (!sig) fail(head.pos, "unknown predicate: " + head.text);
      take();  // '('
      std::vector<Term> args;
      if (!at(Tok::RParen)) {
        do args.push_back(parse_term());
        while (accept(Tok::Comma));
      }
      expect(Tok::RParen);
      return Policy::atom(head.text, std::move(args));
    }
    if (!payload_formal_.empty() && head.text == payload_formal_)
      return Policy::payload_hole(head.text);
    fail(head.pos, "expected a policy, found '" + head.text + "'");
  }

  // -- proof terms ------------------------------------------------------------

  ProofTerm parse_proof_term() {
    if (at(Tok::Ident)) {
      Token leaf = take();
      return leaf_rule(leaf);
    }
    Token open = expect(Tok::LParen);
    (void)open;
    Token name = expect_ident();
    ProofTerm t = parse_rule_body(name);
    expect(Tok::RParen);
    return t;
  }

  ProofTerm leaf_rule(const Token& name) {
    auto rule = rule_from_name(name.text);
    if (!rule) fail(name.pos, "unknown rule '" + name.text + "'");
    ProofTerm t;
    t.rule = *rule;
    t.pos = name.pos;
    return t;
  }

  ProofTerm parse_rule_body(const Token& name) {
    if (name.text == "der_pol") {
      ProofTerm t;
      t.rule = Rule::DerPol;
      t.pos = name.pos;
      t.op = parse_op();
      return t;
    }
    auto rule = rule_from_name(name.text);
    if (!rule) fail(name.pos, "unknown rule '" + name.text + "'");
    ProofTerm t;
    t.rule = *rule;
    t.pos = name.pos;
    switch (*rule) {
      case Rule::Cut:
        expect(Tok::LBrace);
        free_seen_.clear();
        t.cut_formula = parse_policy();
        expect(Tok::RBrace);
        t.gamma_split = expect(Tok::Number).num;
        t.delta_split = expect(Tok::Number).num;
        t.children.push_back(parse_proof_term());
        t.children.push_back(parse_proof_term());
        break;
      case Rule::AndR:
      case Rule::ImpL:
        t.gamma_split = expect(Tok::Number).num;
        t.delta_split = expect(Tok::Number).num;
        t.children.push_back(parse_proof_term());
        t.children.push_back(parse_proof_term());
        break;
      case Rule::ForallLAgent:
      case Rule::ForallLData:
        expect(Tok::LBrace);
        t.witness = parse_term();
        expect(Tok::RBrace);
        t.children.push_back(parse_proof_term());
        break;
      case Rule::ForallRAgent:
      case Rule::ForallRData:
        t.eigen = expect_ident().text;
        t.children.push_back(parse_proof_term());
        break;
      case Rule::PermL:
      case Rule::PermAct:
        t.position = expect(Tok::Number).num;
        t.children.push_back(parse_proof_term());
        break;
      case Rule::Init:
      case Rule::DerPol:
        break;
      default:
        t.children.push_back(parse_proof_term());
        break;
    }
    return t;
  }

  OpDerivation parse_op() {
    if (at(Tok::Ident)) {
      Token leaf = take();
      if (leaf.text == "op_atom") return OpDerivation{OpDerivation::Rule::Atom, {}, "", {}};
      fail(leaf.pos, "op rule '" + leaf.text + "' needs arguments");
    }
    expect(Tok::LParen);
    Token name = expect_ident();
    OpDerivation od;
    if (name.text == "op_cond_imp") {
      od.rule = OpDerivation::Rule::CondImp;
      od.children.push_back(parse_op());
    } else if (name.text == "op_oblig_imp") {
      od.rule = OpDerivation::Rule::ObligImp;
      od.children.push_back(parse_op());
    } else if (name.text == "op_and") {
      od.rule = OpDerivation::Rule::And;
      od.children.push_back(parse_op());
      od.children.push_back(parse_op());
    } else if (name.text == "op_says") {
      od.rule = OpDerivation::Rule::Says;
      od.children.push_back(parse_op());
    } else if (name.text == "op_forall") {
      od.rule = OpDerivation::Rule::Forall;
      od.eigen = expect_ident().text;
      od.children.push_back(parse_op());
    } else if (name.text == "op_owns") {
      od.rule = OpDerivation::Rule::Owns;
      od.owns_indices.push_back(expect(Tok::Number).num);
    } else if (name.text == "op_atom") {
      od.rule = OpDerivation::Rule::Atom;
      while (at(Tok::Number)) od.owns_indices.push_back(take().num);
    } else {
      fail(name.pos, "unknown op rule '" + name.text + "'");
    }
    expect(Tok::RParen);
    return od;
  }
};

}  // namespace

ScenarioScript parse_scenario_text(std::string_view text, std::string source_name) {
  Parser p(text, std::move(source_name));
  return p.parse_file();
}

ScenarioScript parse_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario_text(ss.str(), path);
}

PolicyRef parse_policy_text(std::string_view text, const ScenarioScript& context) {
  Parser p(text, context.source + ":<policy>");
  return p.parse_single_policy(context);
}

ActionTemplate parse_action_text(std::string_view text, const ScenarioScript& context) {
  Parser p(text, context.source + ":<action>");
  return p.parse_single_action(context);
}

}  // namespace auditlog

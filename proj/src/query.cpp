#include "flexq/query.hpp"

#include <cctype>

#include "flexq/error.hpp"
#include "flexq/knowledge_base.hpp"
#include "flexq/label_catalog.hpp"
#include "flexq/text.hpp"

namespace flexq {

std::string_view to_string(Aggregate agg) {
  switch (agg) {
    case Aggregate::avg: return "AVG";
    case Aggregate::sum: return "SUM";
    case Aggregate::count: return "COUNT";
  }
  return "?";
}

namespace {

enum class Tok { ident, number, lparen, rparen, comma, star, semicolon, end };

struct Token {
  Tok kind;
  std::string_view text;
  std::size_t pos;
};

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto is_digit = [&](std::size_t at) {
    return at < s.size() && std::isdigit(static_cast<unsigned char>(s[at])) != 0;
  };
  while (i < s.size()) {
    unsigned char ch = static_cast<unsigned char>(s[i]);
    if (std::isspace(ch)) {
      ++i;
      continue;
    }
    std::size_t start = i;
    if (std::isalpha(ch) || ch == '_') {
      while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_')) ++i;
      out.push_back({Tok::ident, s.substr(start, i - start), start});
      continue;
    }
    bool signed_number = (ch == '-' || ch == '+') && (is_digit(i + 1) || (i + 1 < s.size() && s[i + 1] == '.' && is_digit(i + 2)));
    if (std::isdigit(ch) || (ch == '.' && is_digit(i + 1)) || signed_number) {
      if (signed_number) ++i;
      while (is_digit(i)) ++i;
      if (i < s.size() && s[i] == '.') {
        ++i;
        while (is_digit(i)) ++i;
      }
      if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
        std::size_t save = i++;
        if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
        if (is_digit(i)) {
          while (is_digit(i)) ++i;
        } else {
          i = save;
        }
      }
      if (i < s.size() && (std::isalpha(static_cast<unsigned char>(s[i])) || s[i] == '_')) {
        throw SyntaxError("malformed number", start);
      }
      out.push_back({Tok::number, s.substr(start, i - start), start});
      continue;
    }
    Tok kind;
    switch (ch) {
      case '(': kind = Tok::lparen; break;
      case ')': kind = Tok::rparen; break;
      case ',': kind = Tok::comma; break;
      case '*': kind = Tok::star; break;
      case ';': kind = Tok::semicolon; break;
      default:
        throw SyntaxError(std::string("unexpected character '") + static_cast<char>(ch) + "'", start);
    }
    out.push_back({kind, s.substr(start, 1), start});
    ++i;
  }
  out.push_back({Tok::end, {}, s.size()});
  return out;
}

std::string_view describe(Tok kind) {
  switch (kind) {
    case Tok::ident: return "identifier";
    case Tok::number: return "number";
    case Tok::lparen: return "'('";
    case Tok::rparen: return "')'";
    case Tok::comma: return "','";
    case Tok::star: return "'*'";
    case Tok::semicolon: return "';'";
    case Tok::end: return "end of input";
  }
  return "token";
}

class Parser {
 public:
  explicit Parser(std::string_view text) : tokens_(tokenize(text)) {}

  FlexibleQuery flexible() {
    FlexibleQuery q;
    head(q);
    tail(q);
    if (accept_keyword("WITH")) {
      expect_keyword("CONFIDENCE");
      q.confidence = confidence();
    }
    finish();
    return q;
  }

  ApproximateQuery approximate() {
    ApproximateQuery aq;
    auto& q = aq.base;
    head(q);
    expect(Tok::comma);
    q.confidence = confidence();
    expect_keyword("AS");
    expect_keyword("CONFIDENCE");
    expect(Tok::comma);

    const Token& fn = expect(Tok::ident);
    std::string wanted = "Cons" + interval_stem(q.aggregate) + "Interval";
    if (!iequals(fn.text, wanted)) {
      throw SyntaxError("expected " + wanted + " for " + std::string(to_string(q.aggregate)), fn.pos);
    }
    expect(Tok::lparen);
    const Token& p_tok = peek();
    double p = confidence();
    if (p != q.confidence) throw SyntaxError("interval confidence differs from select list", p_tok.pos);
    expect(Tok::comma);
    const Token& lo_tok = peek();
    aq.interval.min = number();
    expect(Tok::comma);
    aq.interval.max = number();
    if (!(aq.interval.min <= aq.interval.max)) throw SyntaxError("interval bounds out of order", lo_tok.pos);
    expect(Tok::rparen);

    tail(q);
    expect_keyword("SAMPLE");
    const Token& s_tok = peek();
    aq.sample_pct = number();
    if (!(aq.sample_pct > 0.0 && aq.sample_pct <= 100.0)) {
      throw SyntaxError("sample percentage must be in (0, 100]", s_tok.pos);
    }
    expect_keyword("PERCENT");
    finish();
    return aq;
  }

 private:
  static std::string interval_stem(Aggregate agg) {
    switch (agg) {
      case Aggregate::avg: return "Avg";
      case Aggregate::sum: return "Sum";
      case Aggregate::count: return "Count";
    }
    return {};
  }

  void head(FlexibleQuery& q) {
    expect_keyword("SELECT");
    const Token& agg = expect(Tok::ident);
    if (iequals(agg.text, "AVG")) {
      q.aggregate = Aggregate::avg;
    } else if (iequals(agg.text, "SUM")) {
      q.aggregate = Aggregate::sum;
    } else if (iequals(agg.text, "COUNT")) {
      q.aggregate = Aggregate::count;
    } else if (iequals(agg.text, "MAX") || iequals(agg.text, "MIN") || iequals(agg.text, "VAR") ||
               iequals(agg.text, "VARIANCE") || iequals(agg.text, "STDDEV")) {
      throw SyntaxError("unsupported aggregate '" + std::string(agg.text) +
                            "' (supported: AVG, SUM, COUNT)",
                        agg.pos);
    } else {
      throw SyntaxError("unknown aggregate '" + std::string(agg.text) + "'", agg.pos);
    }
    expect(Tok::lparen);
    if (peek().kind == Tok::ident) {
      q.target = std::string(take().text);
    } else if (peek().kind == Tok::star) {
      const Token& star = take();
      if (q.aggregate != Aggregate::count) throw SyntaxError("'*' is only valid in COUNT(*)", star.pos);
    }
    expect(Tok::rparen);
  }

  void tail(FlexibleQuery& q) {
    expect_keyword("FROM");
    q.table = std::string(expect(Tok::ident).text);
    expect_keyword("WHERE");
    do {
      const Token& attr = expect(Tok::ident);
      expect_keyword("IS");
      const Token& label = expect(Tok::ident);
      Predicate pred{std::string(attr.text), std::string(label.text)};
      for (const auto& other : q.predicates) {
        if (iequals(other.attribute, pred.attribute) && iequals(other.label, pred.label)) {
          throw SyntaxError("duplicate predicate " + pred.attribute + " IS " + pred.label, attr.pos);
        }
      }
      q.predicates.push_back(std::move(pred));
    } while (accept_keyword("AND"));
  }

  void finish() {
    if (peek().kind == Tok::semicolon) take();
    const Token& t = peek();
    if (t.kind != Tok::end) {
      throw SyntaxError("unexpected " + std::string(describe(t.kind)) +
                            (t.text.empty() ? "" : " '" + std::string(t.text) + "'"),
                        t.pos);
    }
  }

  double confidence() {
    const Token& t = peek();
    double p = number();
    if (!(p > 0.0 && p < 1.0)) throw SyntaxError("confidence must be in (0, 1)", t.pos);
    return p;
  }

  double number() {
    const Token& t = expect(Tok::number);
    auto v = parse_double(t.text);
    if (!v) throw SyntaxError("malformed number '" + std::string(t.text) + "'", t.pos);
    return *v;
  }

  const Token& peek() const { return tokens_[at_]; }
  const Token& take() { return tokens_[at_ < tokens_.size() - 1 ? at_++ : at_]; }

  const Token& expect(Tok kind) {
    const Token& t = peek();
    if (t.kind != kind) {
      throw SyntaxError("expected " + std::string(describe(kind)) + ", found " +
                            std::string(describe(t.kind)) +
                            (t.text.empty() ? "" : " '" + std::string(t.text) + "'"),
                        t.pos);
    }
    return take();
  }

  bool accept_keyword(std::string_view kw) {
    if (peek().kind == Tok::ident && iequals(peek().text, kw)) {
      take();
      return true;
    }
    return false;
  }

  void expect_keyword(std::string_view kw) {
    if (!accept_keyword(kw)) {
      const Token& t = peek();
      throw SyntaxError("expected " + std::string(kw) + ", found " + std::string(describe(t.kind)) +
                            (t.text.empty() ? "" : " '" + std::string(t.text) + "'"),
                        t.pos);
    }
  }

  std::vector<Token> tokens_;
  std::size_t at_ = 0;
};

std::string select_item(const FlexibleQuery& q) {
  std::string arg = q.target ? *q.target : q.aggregate == Aggregate::count ? "*" : "";
  return std::string(to_string(q.aggregate)) + "(" + arg + ")";
}

std::string where_clause(const FlexibleQuery& q) {
  std::string out = " FROM " + q.table + " WHERE ";
  for (std::size_t i = 0; i < q.predicates.size(); ++i) {
    if (i > 0) out += " AND ";
    out += q.predicates[i].attribute + " IS " + q.predicates[i].label;
  }
  return out;
}

}  // namespace

FlexibleQuery parse_query(std::string_view text) { return Parser(text).flexible(); }

ApproximateQuery parse_approximate(std::string_view text) { return Parser(text).approximate(); }

std::string to_string(const FlexibleQuery& q) {
  return "SELECT " + select_item(q) + where_clause(q) + " WITH CONFIDENCE " +
         format_double(q.confidence);
}

std::string to_string(const ApproximateQuery& aq) {
  const auto& q = aq.base;
  std::string stem = q.aggregate == Aggregate::avg ? "Avg" : q.aggregate == Aggregate::sum ? "Sum" : "Count";
  std::string p = format_double(q.confidence);
  return "SELECT " + select_item(q) + ", " + p + " AS confidence, Cons" + stem + "Interval(" + p +
         ", " + format_double(aq.interval.min) + ", " + format_double(aq.interval.max) + ")" +
         where_clause(q) + " SAMPLE " + format_double(aq.sample_pct) + " PERCENT";
}

std::vector<Diagnostic> validate(const FlexibleQuery& q, const KnowledgeBase& kb,
                                 const LabelCatalog& labels) {
  std::vector<Diagnostic> out;
  if (!iequals(q.table, kb.source())) {
    out.push_back({std::nullopt, "table '" + q.table + "' does not match the knowledge base source '" +
                                     kb.source() + "'"});
  }
  if (!(q.confidence > 0.0 && q.confidence < 1.0)) {
    out.push_back({std::nullopt, "confidence must be in (0, 1)"});
  }
  if (q.aggregate != Aggregate::count) {
    if (!q.target) {
      out.push_back({std::nullopt, std::string(to_string(q.aggregate)) + " needs a target attribute"});
    } else if (!kb.has_attribute(*q.target)) {
      out.push_back({std::nullopt, "target attribute '" + *q.target + "' is not a numeric attribute of '" +
                                       kb.source() + "'"});
    }
  } else if (q.target && !kb.has_attribute(*q.target)) {
    out.push_back({std::nullopt, "target attribute '" + *q.target + "' is not a numeric attribute of '" +
                                     kb.source() + "'"});
  }
  if (q.predicates.empty()) out.push_back({std::nullopt, "query needs at least one predicate"});
  if (q.predicates.size() > kMaxPredicates) {
    out.push_back({std::nullopt, "at most " + std::to_string(kMaxPredicates) + " predicates are supported"});
  }
  for (std::size_t i = 0; i < q.predicates.size(); ++i) {
    const auto& p = q.predicates[i];
    if (labels.find(p.attribute, p.label) == nullptr) {
      out.push_back({i, "predicate " + std::to_string(i + 1) + " (" + p.attribute + " IS " + p.label +
                            "): unknown label '" + p.label + "' for attribute '" + p.attribute + "'"});
    } else if (!kb.label_index(p.attribute, p.label)) {
      out.push_back({i, "predicate " + std::to_string(i + 1) + " (" + p.attribute + " IS " + p.label +
                            "): label is not in the knowledge base; rebuild it"});
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (iequals(p.attribute, q.predicates[j].attribute) && iequals(p.label, q.predicates[j].label)) {
        out.push_back({i, "predicate " + std::to_string(i + 1) + " repeats predicate " + std::to_string(j + 1)});
      }
    }
  }
  return out;
}

ApproximateQuery rewrite(const FlexibleQuery& q, double sample_pct, const KnowledgeBase& kb) {
  if (!(sample_pct > 0.0 && sample_pct <= 100.0)) {
    throw ParameterError("sample percentage must be in (0, 100], got " + format_double(sample_pct));
  }
  ApproximateQuery aq{q, {0.0, 1.0}, sample_pct};
  if (q.aggregate == Aggregate::count) return aq;
  if (kb.size() == 0) throw RangeError("relation '" + kb.source() + "' is empty; no value range");
  if (!q.target) throw SchemaError(std::string(to_string(q.aggregate)) + " needs a target attribute");
  auto range = kb.range_of(*q.target);
  if (!range) throw SchemaError("no value range for attribute '" + *q.target + "'");
  aq.interval = *range;
  return aq;
}

}  // namespace flexq

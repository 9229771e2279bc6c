#pragma once

#include <array>
#include <cctype>
#include <optional>
#include <string>
#include <vector>

#include "shapecap/errors.hpp"
#include "shapecap/semantics.hpp"

// Bidirectional micro-grammar over the caption fragment. realize() emits
// exactly one canonical sentence per AST; parse_caption() inverts it and
// additionally accepts a few attested variants that realize() never
// produces ("exactly all the five", "most", bare numbers/fractions).

namespace shapecap {

enum class GNumber : std::uint8_t { singular, plural };

namespace lexicon {

inline const char* noun(Shape s, GNumber n) {
  const bool pl = n == GNumber::plural;
  switch (s) {
    case Shape::square: return pl ? "squares" : "square";
    case Shape::rectangle: return pl ? "rectangles" : "rectangle";
    case Shape::triangle: return pl ? "triangles" : "triangle";
    case Shape::pentagon: return pl ? "pentagons" : "pentagon";
    case Shape::cross: return pl ? "crosses" : "cross";
    case Shape::circle: return pl ? "circles" : "circle";
    case Shape::semicircle: return pl ? "semicircles" : "semicircle";
    case Shape::ellipse: return pl ? "ellipses" : "ellipse";
  }
  return "?";
}

inline const char* generic_noun(GNumber n) {
  return n == GNumber::plural ? "shapes" : "shape";
}

inline constexpr std::array<const char*, 11> kNumberWords = {
    "zero", "one", "two",   "three", "four", "five",
    "six",  "seven", "eight", "nine",  "ten"};

inline std::string number_word(std::int64_t v) {
  if (v < 0 || v > 10)
    throw UnsupportedQuantity("no word for count " + std::to_string(v));
  return kNumberWords[static_cast<std::size_t>(v)];
}

inline std::optional<int> number_from_word(const std::string& w) {
  for (std::size_t i = 0; i < kNumberWords.size(); ++i)
    if (w == kNumberWords[i]) return static_cast<int>(i);
  return std::nullopt;
}

// Count modifiers; neq realizes as negated eq.
inline std::string modifier(Comparison c) {
  switch (c) {
    case Comparison::lt: return "less than";
    case Comparison::leq: return "at most";
    case Comparison::eq: return "exactly";
    case Comparison::geq: return "at least";
    case Comparison::gt: return "more than";
    case Comparison::neq: return "not exactly";
  }
  return "?";
}

// "half" binds "the" directly; the other fractions need "of".
inline std::string fraction_phrase(const Rational& f) {
  if (f == Rational(1, 2)) return "half";
  if (f == Rational(1, 3)) return "a third of";
  if (f == Rational(2, 3)) return "two thirds of";
  if (f == Rational(1, 4)) return "a quarter of";
  if (f == Rational(3, 4)) return "three quarters of";
  throw UnsupportedQuantity("fraction " + f.str() + " not in lexicon");
}

inline std::string ratio_phrase(const Rational& r) {
  if (r == Rational(1)) return "as many";
  if (r == Rational(2)) return "twice as many";
  if (r == Rational(1, 2)) return "half as many";
  if (r == Rational(3)) return "three times as many";
  throw UnsupportedQuantity("ratio " + r.str() + " not in lexicon");
}

inline bool vowel_initial(const std::string& word) {
  if (word.empty()) return false;
  const char c = static_cast<char>(std::tolower(word.front()));
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u';
}

inline std::string article_for(const std::string& phrase) {
  return vowel_initial(phrase) ? "an" : "a";
}

}  // namespace lexicon

// --- realization ----------------------------------------------------------

// Quantity phrase for a QSpec: "no", "all the (five)", "at least three
// of the five", "more than a third of the", ...
inline std::string lexicalize_quantity(const QSpec& q) {
  if (q.kind == QuantifierKind::count) {
    if (q.value.den != 1 || q.value.num < 0)
      throw UnsupportedQuantity("count value must be a whole number");
    if (!q.restrictor_count && q.value == Rational(0) &&
        q.comparison == Comparison::eq)
      return "no";
    std::string out =
        lexicon::modifier(q.comparison) + " " + lexicon::number_word(q.value.num);
    if (q.restrictor_count)
      out += " of the " + lexicon::number_word(*q.restrictor_count);
    return out;
  }

  // fraction kind
  if (q.value == Rational(1)) {
    std::string out;
    if (q.comparison == Comparison::eq)
      out = "all the";
    else if (q.comparison == Comparison::neq)
      out = "not all the";
    else
      throw UnsupportedQuantity("whole-fraction quantity supports eq/neq only");
    if (q.restrictor_count) out += " " + lexicon::number_word(*q.restrictor_count);
    return out;
  }
  if (q.restrictor_count)
    throw UnsupportedQuantity(
        "number restriction on a proper fraction is outside the fragment");
  return lexicon::modifier(q.comparison) + " " +
         lexicon::fraction_phrase(q.value) + " the";
}

namespace detail {

inline std::string realize_np(const Restrictor& r, GNumber n) {
  std::string out;
  if (r.color) out = std::string(to_string(*r.color)) + " ";
  out += r.shape ? lexicon::noun(*r.shape, n) : lexicon::generic_noun(n);
  return out;
}

inline std::string realize_vp(const Body& body, GNumber n) {
  const std::string copula = n == GNumber::singular ? "is" : "are";
  if (const auto* attr = std::get_if<AttributeBody>(&body)) {
    if (!attr->shape && !attr->color)
      throw UnsupportedAst("attribute body with no attributes");
    if (!attr->shape) return copula + " " + to_string(*attr->color);
    std::string compl_;
    if (attr->color) compl_ = std::string(to_string(*attr->color)) + " ";
    compl_ += lexicon::noun(*attr->shape, n);
    if (n == GNumber::singular)
      return copula + " " + lexicon::article_for(compl_) + " " + compl_;
    return copula + " " + compl_;
  }
  const auto& rel = std::get<RelationBody>(body);
  std::string phrase;
  switch (rel.relation) {
    case Relation::above: phrase = "above"; break;
    case Relation::below: phrase = "below"; break;
    case Relation::left_of: phrase = "to the left of"; break;
    case Relation::right_of: phrase = "to the right of"; break;
  }
  const std::string landmark = realize_np(rel.landmark, GNumber::singular);
  return copula + " " + phrase + " " + lexicon::article_for(landmark) + " " +
         landmark;
}

inline std::string realize_clause(const Clause& clause) {
  return std::visit(
      [](const auto& c) -> std::string {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, Existential>) {
          const std::string np = realize_np(c.restrictor, GNumber::singular);
          return lexicon::article_for(np) + " " + np + " " +
                 realize_vp(c.body, GNumber::singular);
        } else if constexpr (std::is_same_v<T, NegatedExistential>) {
          return "no " + realize_np(c.restrictor, GNumber::singular) + " " +
                 realize_vp(c.body, GNumber::singular);
        } else if constexpr (std::is_same_v<T, Quantified>) {
          const bool one = c.qspec.kind == QuantifierKind::count &&
                           c.qspec.value == Rational(1);
          // "one" of several named entities keeps a plural noun but a
          // singular copula: "more than one of the seven ... is ..."
          const GNumber noun_num = (one && !c.qspec.restrictor_count)
                                       ? GNumber::singular
                                       : GNumber::plural;
          const GNumber copula_num =
              one ? GNumber::singular : GNumber::plural;
          return lexicalize_quantity(c.qspec) + " " +
                 realize_np(c.restrictor, noun_num) + " " +
                 realize_vp(c.body, copula_num);
        } else {
          if (c.cspec.comparison == Comparison::neq)
            throw UnsupportedAst("comparatives do not take neq");
          std::string out;
          if (c.cspec.comparison != Comparison::eq)
            out = lexicon::modifier(c.cspec.comparison) + " ";
          out += lexicon::ratio_phrase(c.cspec.ratio);
          out += " " + realize_np(c.restrictor_a, GNumber::plural);
          out += " as " + realize_np(c.restrictor_b, GNumber::plural);
          out += " " + realize_vp(c.body, GNumber::plural);
          return out;
        }
      },
      clause);
}

}  // namespace detail

// Canonical English sentence for an AST. Deterministic: one AST, one string.
inline std::string realize(const CaptionAst& ast) {
  std::string out = detail::realize_clause(ast.head);
  if (ast.conjunct)
    out += ", and " + detail::realize_clause(*ast.conjunct);
  out += ".";
  out[0] = static_cast<char>(std::toupper(out[0]));
  return out;
}

// --- parsing --------------------------------------------------------------

namespace detail {

inline std::vector<std::string> tokenize_caption(const std::string& text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  const std::size_t n = text.size();
  auto fail = [&](const std::string& msg) {
    throw ParseFailure(msg, tokens.size());
  };
  while (i < n) {
    if (!std::isalpha(static_cast<unsigned char>(text[i])))
      fail("expected a word at character " + std::to_string(i));
    std::string word;
    while (i < n && std::isalpha(static_cast<unsigned char>(text[i])))
      word += text[i++];
    tokens.push_back(word);
    if (i >= n) fail("caption must end with '.'");
    if (text[i] == '.') {
      tokens.emplace_back(".");
      ++i;
      if (i != n) fail("content after final '.'");
      return tokens;
    }
    if (text[i] == ',') {
      tokens.emplace_back(",");
      ++i;
      if (i >= n || text[i] != ' ') fail("',' must be followed by a space");
      ++i;
      continue;
    }
    if (text[i] == ' ') {
      ++i;
      if (i >= n || text[i] == ' ')
        fail("words must be separated by single spaces");
      continue;
    }
    fail(std::string("unexpected character '") + text[i] + "'");
  }
  fail("empty caption");
  return tokens;  // unreachable
}

class CaptionParser {
 public:
  explicit CaptionParser(const std::string& text)
      : tokens_(tokenize_caption(text)) {
    // case tolerance is limited to the sentence-initial word
    for (char& c : tokens_.front())
      c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }

  CaptionAst parse() {
    CaptionAst ast{parse_clause(), {}};
    if (peek() == ",") {
      advance();
      expect("and");
      ast.conjunct = parse_clause();
    }
    expect(".");
    if (pos_ != tokens_.size()) fail("trailing tokens");
    return ast;
  }

 private:
  std::vector<std::string> tokens_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& msg) const {
    const std::string at =
        pos_ < tokens_.size() ? "'" + tokens_[pos_] + "'" : "end of input";
    throw ParseFailure(msg + " at token " + std::to_string(pos_) + " (" + at +
                           ")",
                       pos_);
  }

  const std::string& peek(std::size_t ahead = 0) const {
    static const std::string empty;
    return pos_ + ahead < tokens_.size() ? tokens_[pos_ + ahead] : empty;
  }
  const std::string& advance() { return tokens_[pos_++]; }
  void expect(const std::string& w) {
    if (peek() != w) fail("expected '" + w + "'");
    advance();
  }

  // --- lexicon lookups ---

  static std::optional<Color> color_word(const std::string& w) {
    for (Color c : kEntityColors)
      if (w == to_string(c)) return c;
    return std::nullopt;
  }

  struct NounHit {
    std::optional<Shape> shape;  // nullopt = generic "shape(s)"
    GNumber number;
  };

  static std::optional<NounHit> noun_word(const std::string& w) {
    if (w == "shape") return NounHit{std::nullopt, GNumber::singular};
    if (w == "shapes") return NounHit{std::nullopt, GNumber::plural};
    for (Shape s : kAllShapes) {
      if (w == lexicon::noun(s, GNumber::singular))
        return NounHit{s, GNumber::singular};
      if (w == lexicon::noun(s, GNumber::plural))
        return NounHit{s, GNumber::plural};
    }
    return std::nullopt;
  }

  // --- quantity phrase recognizers ---

  std::optional<Comparison> try_modifier() {
    if (peek() == "less" && peek(1) == "than") {
      pos_ += 2;
      return Comparison::lt;
    }
    if (peek() == "more" && peek(1) == "than") {
      pos_ += 2;
      return Comparison::gt;
    }
    if (peek() == "at" && peek(1) == "least") {
      pos_ += 2;
      return Comparison::geq;
    }
    if (peek() == "at" && peek(1) == "most") {
      pos_ += 2;
      return Comparison::leq;
    }
    if (peek() == "not" && peek(1) == "exactly") {
      pos_ += 2;
      return Comparison::neq;
    }
    if (peek() == "exactly" && peek(1) != "all") {
      advance();
      return Comparison::eq;
    }
    return std::nullopt;
  }

  bool ratio_ahead() const {
    return (peek() == "as" && peek(1) == "many") ||
           (peek() == "twice" && peek(1) == "as") ||
           (peek() == "half" && peek(1) == "as") ||
           (peek() == "three" && peek(1) == "times");
  }

  Rational parse_ratio() {
    if (peek() == "as") {
      advance();
      expect("many");
      return Rational(1);
    }
    if (peek() == "twice") {
      advance();
      expect("as");
      expect("many");
      return Rational(2);
    }
    if (peek() == "half") {
      advance();
      expect("as");
      expect("many");
      return Rational(1, 2);
    }
    advance();  // "three"
    expect("times");
    expect("as");
    expect("many");
    return Rational(3);
  }

  bool fraction_ahead() const {
    if (peek() == "half" && peek(1) == "the") return true;
    if (peek() == "a" && (peek(1) == "third" || peek(1) == "quarter"))
      return true;
    if (peek() == "two" && peek(1) == "thirds") return true;
    if (peek() == "three" && peek(1) == "quarters") return true;
    return false;
  }

  Rational parse_fraction() {  // consumes the trailing "the" as well
    Rational value;
    if (peek() == "half") {
      advance();
      value = Rational(1, 2);
    } else if (peek() == "a") {
      advance();
      value = peek() == "third" ? Rational(1, 3) : Rational(1, 4);
      advance();
      expect("of");
    } else if (peek() == "two") {
      advance();
      expect("thirds");
      expect("of");
      value = Rational(2, 3);
    } else {
      advance();  // "three"
      expect("quarters");
      expect("of");
      value = Rational(3, 4);
    }
    expect("the");
    return value;
  }

  // --- phrase parsers ---

  struct NounPhrase {
    Restrictor restrictor;
    GNumber number;
  };

  NounPhrase parse_np() {
    Restrictor r;
    if (auto c = color_word(peek())) {
      r.color = *c;
      advance();
    }
    const auto noun = noun_word(peek());
    if (!noun) fail("expected a noun");
    advance();
    r.shape = noun->shape;
    return NounPhrase{r, noun->number};
  }

  void check_article(const std::string& art, const std::string& next_word) {
    const bool want_an = lexicon::vowel_initial(next_word);
    if ((art == "an") != want_an) fail("article does not match noun phrase");
  }

  NounPhrase parse_article_np() {
    if (peek() != "a" && peek() != "an") fail("expected 'a' or 'an'");
    const std::string art = advance();
    check_article(art, peek());
    NounPhrase np = parse_np();
    if (np.number != GNumber::singular)
      fail("article requires a singular noun");
    return np;
  }

  Body parse_vp(GNumber copula_number) {
    if (peek() != "is" && peek() != "are") fail("expected 'is' or 'are'");
    const GNumber found =
        peek() == "is" ? GNumber::singular : GNumber::plural;
    if (found != copula_number) fail("copula number disagrees with subject");
    advance();

    // spatial relation
    std::optional<Relation> rel;
    if (peek() == "above") {
      rel = Relation::above;
      advance();
    } else if (peek() == "below") {
      rel = Relation::below;
      advance();
    } else if (peek() == "to") {
      advance();
      expect("the");
      if (peek() == "left")
        rel = Relation::left_of;
      else if (peek() == "right")
        rel = Relation::right_of;
      else
        fail("expected 'left' or 'right'");
      advance();
      expect("of");
    }
    if (rel) {
      const NounPhrase landmark = parse_article_np();
      return RelationBody{*rel, landmark.restrictor};
    }

    // attribute complement
    if (peek() == "a" || peek() == "an") {
      if (copula_number != GNumber::singular)
        fail("indefinite complement requires a singular copula");
      const NounPhrase np = parse_article_np();
      if (!np.restrictor.shape && !np.restrictor.color)
        fail("complement needs at least one attribute");
      return AttributeBody{np.restrictor.shape, np.restrictor.color};
    }
    if (auto c = color_word(peek())) {
      advance();
      if (auto noun = noun_word(peek())) {
        if (noun->number != GNumber::plural ||
            copula_number != GNumber::plural)
          fail("bare noun complement must be plural");
        advance();
        return AttributeBody{noun->shape, *c};
      }
      return AttributeBody{std::nullopt, *c};
    }
    if (auto noun = noun_word(peek())) {
      if (noun->number != GNumber::plural || copula_number != GNumber::plural)
        fail("bare noun complement must be plural");
      if (!noun->shape) fail("complement needs at least one attribute");
      advance();
      return AttributeBody{noun->shape, std::nullopt};
    }
    fail("expected a predicate");
  }

  Clause parse_quantified(QSpec qspec) {
    const bool one = qspec.kind == QuantifierKind::count &&
                     qspec.value == Rational(1);
    const GNumber noun_num = (one && !qspec.restrictor_count)
                                 ? GNumber::singular
                                 : GNumber::plural;
    const NounPhrase np = parse_np();
    if (np.number != noun_num) fail("noun number disagrees with quantifier");
    const GNumber copula_num = one ? GNumber::singular : GNumber::plural;
    Body body = parse_vp(copula_num);
    return Quantified{std::move(qspec), np.restrictor, std::move(body)};
  }

  Clause parse_comparative(Comparison cmp) {
    const Rational ratio = parse_ratio();
    const NounPhrase a = parse_np();
    if (a.number != GNumber::plural) fail("comparative noun must be plural");
    expect("as");
    const NounPhrase b = parse_np();
    if (b.number != GNumber::plural) fail("comparative noun must be plural");
    Body body = parse_vp(GNumber::plural);
    return Comparative{CompSpec{ratio, cmp}, a.restrictor, b.restrictor,
                       std::move(body)};
  }

  Clause parse_all_quantifier(Comparison cmp) {
    expect("all");
    expect("the");
    QSpec q{QuantifierKind::fraction, cmp, Rational(1), std::nullopt};
    if (auto rc = lexicon::number_from_word(peek())) {
      q.restrictor_count = *rc;
      advance();
    }
    return parse_quantified(std::move(q));
  }

  Clause parse_clause() {
    // "not all the ..." (neq over the whole fraction)
    if (peek() == "not" && peek(1) == "all") {
      advance();
      return parse_all_quantifier(Comparison::neq);
    }
    // "exactly all the five ..." is accepted but never produced
    if (peek() == "exactly" && peek(1) == "all") {
      advance();
      return parse_all_quantifier(Comparison::eq);
    }
    if (peek() == "all") return parse_all_quantifier(Comparison::eq);

    const std::optional<Comparison> mod = try_modifier();
    if (ratio_ahead()) {
      if (mod && *mod == Comparison::neq)
        fail("comparatives do not take 'not exactly'");
      return parse_comparative(mod.value_or(Comparison::eq));
    }
    if (fraction_ahead()) {
      const Rational value = parse_fraction();
      return parse_quantified(QSpec{QuantifierKind::fraction,
                                    mod.value_or(Comparison::eq), value,
                                    std::nullopt});
    }
    if (auto v = lexicon::number_from_word(peek())) {
      advance();
      QSpec q{QuantifierKind::count, mod.value_or(Comparison::eq),
              Rational(*v), std::nullopt};
      if (peek() == "of") {
        advance();
        expect("the");
        const auto rc = lexicon::number_from_word(peek());
        if (!rc) fail("expected a number word");
        advance();
        q.restrictor_count = *rc;
      }
      return parse_quantified(std::move(q));
    }
    if (mod) fail("expected a quantity after the modifier");

    if (peek() == "a" || peek() == "an") {
      const NounPhrase np = parse_article_np();
      Body body = parse_vp(GNumber::singular);
      return Existential{np.restrictor, std::move(body)};
    }
    if (peek() == "no") {
      advance();
      const NounPhrase np = parse_np();
      if (np.number == GNumber::singular) {
        Body body = parse_vp(GNumber::singular);
        return NegatedExistential{np.restrictor, std::move(body)};
      }
      // "no" with a plural noun is the zero-count quantifier
      Body body = parse_vp(GNumber::plural);
      return Quantified{
          QSpec{QuantifierKind::count, Comparison::eq, Rational(0),
                std::nullopt},
          np.restrictor, std::move(body)};
    }
    // "most" is accepted as more-than-half but never produced
    if (peek() == "most") {
      advance();
      return parse_quantified(QSpec{QuantifierKind::fraction, Comparison::gt,
                                    Rational(1, 2), std::nullopt});
    }
    fail("expected a clause");
  }
};

}  // namespace detail

// Inverse of realize on the canonical fragment: parse_caption(realize(a))
// is structurally equal to a for every supported AST.
inline CaptionAst parse_caption(const std::string& text) {
  return detail::CaptionParser(text).parse();
}

}  // namespace shapecap

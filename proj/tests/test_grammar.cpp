#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "helpers.hpp"
#include "shapecap/grammar.hpp"

using namespace shapecap;

namespace {

std::vector<std::string> words_of(const std::string& sentence) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : sentence) {
    if (std::isalpha(static_cast<unsigned char>(c)))
      cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    else if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

// Copula expected for each clause, in order, per the agreement rules.
std::vector<std::string> expected_copulas(const CaptionAst& ast) {
  std::vector<std::string> out;
  auto one = [](const Clause& c) -> std::string {
    if (std::holds_alternative<Existential>(c) ||
        std::holds_alternative<NegatedExistential>(c))
      return "is";
    if (const auto* q = std::get_if<Quantified>(&c))
      return (q->qspec.kind == QuantifierKind::count &&
              q->qspec.value == Rational(1))
                 ? "is"
                 : "are";
    return "are";
  };
  out.push_back(one(ast.head));
  if (ast.conjunct) out.push_back(one(*ast.conjunct));
  return out;
}

}  // namespace

TEST_CASE("the figure-one caption realizes exactly") {
  CHECK(realize(testutil::fig1_ast()) ==
        "A pentagon is above a green ellipse, and no blue shape is an "
        "ellipse.");
}

TEST_CASE("quantified captions realize the attested surface forms") {
  CHECK(realize(make_caption(Quantified{
            QSpec{QuantifierKind::fraction, Comparison::geq, Rational(1, 2),
                  std::nullopt},
            Restrictor{Shape::triangle, std::nullopt},
            Body{AttributeBody{std::nullopt, Color::red}}})) ==
        "At least half the triangles are red.");

  CHECK(realize(make_caption(Quantified{
            QSpec{QuantifierKind::count, Comparison::gt, Rational(1), 7},
            Restrictor{std::nullopt, Color::cyan},
            Body{AttributeBody{Shape::square, Color::cyan}}})) ==
        "More than one of the seven cyan shapes is a cyan square.");

  CHECK(realize(make_caption(Quantified{
            QSpec{QuantifierKind::count, Comparison::lt, Rational(1),
                  std::nullopt},
            Restrictor{Shape::triangle, std::nullopt},
            Body{AttributeBody{std::nullopt, Color::cyan}}})) ==
        "Less than one triangle is cyan.");

  CHECK(realize(make_caption(Quantified{
            QSpec{QuantifierKind::fraction, Comparison::gt, Rational(1, 3),
                  std::nullopt},
            Restrictor{},
            Body{AttributeBody{Shape::square, Color::cyan}}})) ==
        "More than a third of the shapes are cyan squares.");

  CHECK(realize(make_caption(Comparative{
            CompSpec{Rational(2), Comparison::eq},
            Restrictor{std::nullopt, Color::red},
            Restrictor{std::nullopt, Color::yellow},
            Body{AttributeBody{Shape::circle, std::nullopt}}})) ==
        "Twice as many red shapes as yellow shapes are circles.");

  CHECK(realize(make_caption(Quantified{
            QSpec{QuantifierKind::fraction, Comparison::eq, Rational(1), 5},
            Restrictor{Shape::square, std::nullopt},
            Body{AttributeBody{std::nullopt, Color::red}}})) ==
        "All the five squares are red.");

  CHECK(realize(make_caption(Quantified{
            QSpec{QuantifierKind::count, Comparison::eq, Rational(0),
                  std::nullopt},
            Restrictor{Shape::triangle, std::nullopt},
            Body{AttributeBody{std::nullopt, Color::red}}})) ==
        "No triangles are red.");
}

TEST_CASE("quantity phrases match the attested wording") {
  CHECK(lexicalize_quantity(QSpec{QuantifierKind::count, Comparison::geq,
                                  Rational(3), 5}) ==
        "at least three of the five");
  CHECK(lexicalize_quantity(QSpec{QuantifierKind::count, Comparison::eq,
                                  Rational(0), std::nullopt}) == "no");
  CHECK(lexicalize_quantity(QSpec{QuantifierKind::fraction, Comparison::gt,
                                  Rational(1, 3), std::nullopt}) ==
        "more than a third of the");
  CHECK(lexicalize_quantity(QSpec{QuantifierKind::fraction, Comparison::eq,
                                  Rational(1), std::nullopt}) == "all the");
  CHECK(lexicalize_quantity(QSpec{QuantifierKind::fraction, Comparison::neq,
                                  Rational(1), std::nullopt}) ==
        "not all the");
  CHECK(lexicalize_quantity(QSpec{QuantifierKind::count, Comparison::eq,
                                  Rational(0), 2}) == "exactly zero of the two");
}

TEST_CASE("quantities outside the lexicon are rejected") {
  CHECK_THROWS_AS(lexicalize_quantity(QSpec{QuantifierKind::count,
                                            Comparison::eq, Rational(11),
                                            std::nullopt}),
                  UnsupportedQuantity);
  CHECK_THROWS_AS(lexicalize_quantity(QSpec{QuantifierKind::fraction,
                                            Comparison::eq, Rational(2, 5),
                                            std::nullopt}),
                  UnsupportedQuantity);
  CHECK_THROWS_AS(lexicalize_quantity(QSpec{QuantifierKind::fraction,
                                            Comparison::geq, Rational(1, 2),
                                            3}),
                  UnsupportedQuantity);
  CHECK_THROWS_AS(realize(make_caption(Comparative{
                      CompSpec{Rational(4), Comparison::eq}, Restrictor{},
                      Restrictor{std::nullopt, Color::red},
                      Body{AttributeBody{Shape::circle, std::nullopt}}})),
                  UnsupportedQuantity);
}

TEST_CASE("the six quantification examples parse to the expected forms") {
  const CaptionAst a = parse_caption("Less than one triangle is cyan.");
  CHECK(a == make_caption(Quantified{
                 QSpec{QuantifierKind::count, Comparison::lt, Rational(1),
                       std::nullopt},
                 Restrictor{Shape::triangle, std::nullopt},
                 Body{AttributeBody{std::nullopt, Color::cyan}}}));

  const CaptionAst b = parse_caption("At least half the triangles are red.");
  CHECK(b == make_caption(Quantified{
                 QSpec{QuantifierKind::fraction, Comparison::geq,
                       Rational(1, 2), std::nullopt},
                 Restrictor{Shape::triangle, std::nullopt},
                 Body{AttributeBody{std::nullopt, Color::red}}}));

  const CaptionAst c =
      parse_caption("More than a third of the shapes are cyan squares.");
  CHECK(c == make_caption(Quantified{
                 QSpec{QuantifierKind::fraction, Comparison::gt,
                       Rational(1, 3), std::nullopt},
                 Restrictor{},
                 Body{AttributeBody{Shape::square, Color::cyan}}}));

  const CaptionAst d =
      parse_caption("Exactly all the five squares are red.");
  CHECK(d == make_caption(Quantified{
                 QSpec{QuantifierKind::fraction, Comparison::eq, Rational(1),
                       5},
                 Restrictor{Shape::square, std::nullopt},
                 Body{AttributeBody{std::nullopt, Color::red}}}));

  const CaptionAst e = parse_caption(
      "More than one of the seven cyan shapes is a cyan square.");
  CHECK(e == make_caption(Quantified{
                 QSpec{QuantifierKind::count, Comparison::gt, Rational(1), 7},
                 Restrictor{std::nullopt, Color::cyan},
                 Body{AttributeBody{Shape::square, Color::cyan}}}));

  const CaptionAst f = parse_caption(
      "Twice as many red shapes as yellow shapes are circles.");
  CHECK(f == make_caption(Comparative{
                 CompSpec{Rational(2), Comparison::eq},
                 Restrictor{std::nullopt, Color::red},
                 Restrictor{std::nullopt, Color::yellow},
                 Body{AttributeBody{Shape::circle, std::nullopt}}}));
}

TEST_CASE("out-of-fragment input fails with a token position") {
  CHECK_THROWS_AS(parse_caption("Colorless green ideas sleep furiously."),
                  ParseFailure);
  try {
    parse_caption("Colorless green ideas sleep furiously.");
    FAIL("expected a parse failure");
  } catch (const ParseFailure& e) {
    CHECK(e.token_index == 0);
  }
  try {
    parse_caption("A triangle are red.");
    FAIL("expected a parse failure");
  } catch (const ParseFailure& e) {
    CHECK(e.token_index == 2);  // the offending copula
  }
}

TEST_CASE("only the first word is case tolerant") {
  const CaptionAst expected = make_caption(Quantified{
      QSpec{QuantifierKind::count, Comparison::lt, Rational(1), std::nullopt},
      Restrictor{Shape::triangle, std::nullopt},
      Body{AttributeBody{std::nullopt, Color::cyan}}});
  CHECK(parse_caption("less than one triangle is cyan.") == expected);
  CHECK(parse_caption("LESS than one triangle is cyan.") == expected);
  CHECK_THROWS_AS(parse_caption("Less Than one triangle is cyan."),
                  ParseFailure);
}

TEST_CASE("whitespace must be single spaces") {
  CHECK_THROWS_AS(parse_caption("A  triangle is red."), ParseFailure);
  CHECK_THROWS_AS(parse_caption("A triangle is red"), ParseFailure);
  CHECK_THROWS_AS(parse_caption(" A triangle is red."), ParseFailure);
  CHECK_THROWS_AS(parse_caption("A triangle is red. "), ParseFailure);
}

TEST_CASE("attested variants parse although never produced") {
  // bare numbers and fractions read as exact quantities
  CHECK(parse_caption("Three triangles are red.") ==
        make_caption(Quantified{
            QSpec{QuantifierKind::count, Comparison::eq, Rational(3),
                  std::nullopt},
            Restrictor{Shape::triangle, std::nullopt},
            Body{AttributeBody{std::nullopt, Color::red}}}));
  CHECK(parse_caption("Half the triangles are red.") ==
        make_caption(Quantified{
            QSpec{QuantifierKind::fraction, Comparison::eq, Rational(1, 2),
                  std::nullopt},
            Restrictor{Shape::triangle, std::nullopt},
            Body{AttributeBody{std::nullopt, Color::red}}}));
  CHECK(parse_caption("Most triangles are red.") ==
        make_caption(Quantified{
            QSpec{QuantifierKind::fraction, Comparison::gt, Rational(1, 2),
                  std::nullopt},
            Restrictor{Shape::triangle, std::nullopt},
            Body{AttributeBody{std::nullopt, Color::red}}}));
  CHECK(parse_caption("Not all the triangles are red.") ==
        make_caption(Quantified{
            QSpec{QuantifierKind::fraction, Comparison::neq, Rational(1),
                  std::nullopt},
            Restrictor{Shape::triangle, std::nullopt},
            Body{AttributeBody{std::nullopt, Color::red}}}));
}

TEST_CASE("spatial clauses keep their relation words distinct") {
  const CaptionAst left = make_caption(Existential{
      Restrictor{Shape::circle, Color::red},
      Body{RelationBody{Relation::left_of,
                        Restrictor{Shape::square, std::nullopt}}}});
  const std::string text = realize(left);
  CHECK(text == "A red circle is to the left of a square.");
  CHECK(parse_caption(text) == left);

  const CaptionAst below = make_caption(NegatedExistential{
      Restrictor{std::nullopt, Color::gray},
      Body{RelationBody{Relation::below, Restrictor{}}}});
  CHECK(realize(below) == "No gray shape is below a shape.");
  CHECK(parse_caption(realize(below)) == below);
}

TEST_CASE("parse inverts realize across the whole fragment") {
  testutil::AstSampler sampler(0xC0FFEE);
  int checked = 0;
  for (int i = 0; i < 10000; ++i) {
    const CaptionAst ast = sampler.ast();
    const std::string text = realize(ast);
    const CaptionAst back = parse_caption(text);
    if (!(back == ast)) {
      CAPTURE(text);
      REQUIRE(back == ast);
    }
    ++checked;
  }
  CHECK(checked == 10000);
}

TEST_CASE("copulas agree with their grammatical subjects") {
  testutil::AstSampler sampler(0xBEEF);
  for (int i = 0; i < 3000; ++i) {
    const CaptionAst ast = sampler.ast();
    const std::string text = realize(ast);
    const auto words = words_of(text);
    std::vector<std::string> copulas;
    for (const auto& w : words)
      if (w == "is" || w == "are") copulas.push_back(w);
    REQUIRE(copulas == expected_copulas(ast));
  }
}

TEST_CASE("articles follow the vowel-letter rule") {
  testutil::AstSampler sampler(0xA11A);
  for (int i = 0; i < 3000; ++i) {
    const std::string text = realize(sampler.ast());
    const auto words = words_of(text);
    for (std::size_t k = 0; k + 1 < words.size(); ++k) {
      if (words[k] == "a" || words[k] == "an") {
        const char first = words[k + 1].front();
        const bool vowel = first == 'a' || first == 'e' || first == 'i' ||
                           first == 'o' || first == 'u';
        REQUIRE((words[k] == "an") == vowel);
      }
    }
  }
}

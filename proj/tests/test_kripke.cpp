#include <doctest.h>

#include <algorithm>

#include "delcheck/kripke.hpp"
#include "support.hpp"

using namespace delcheck;
using namespace delcheck::testing;

namespace {

bool has_violation(const S5Report& r, const std::string& from, const std::string& to, S5Property kind) {
  return std::any_of(r.violations.begin(), r.violations.end(),
                     [&](const S5Violation& v) { return v.from == from && v.to == to && v.kind == kind; });
}

std::size_t pairs(const NamedRelations& rel, Agent a) { return rel.at(a).size(); }

}  // namespace

TEST_CASE("validate_s5") {
  CHECK(validate_s5(NamedRelations{{kA, {{"w", "w"}}}}, {"w"}).ok);

  NamedRelations coin{{kA, {{"w1", "w1"}, {"w1", "w2"}, {"w2", "w1"}, {"w2", "w2"}}},
                      {kB, {{"w1", "w1"}, {"w2", "w2"}}}};
  CHECK(validate_s5(coin, {"w1", "w2"}).ok);

  NamedRelations path{{kA, {{"w1", "w2"}, {"w2", "w3"}, {"w1", "w1"}, {"w2", "w2"}, {"w3", "w3"}}}};
  S5Report r = validate_s5(path, {"w1", "w2", "w3"});
  CHECK_FALSE(r.ok);
  CHECK(has_violation(r, "w1", "w3", S5Property::transitive));
  CHECK(has_violation(r, "w2", "w1", S5Property::symmetric));

  NamedRelations no_loop{{kA, {}}};
  r = validate_s5(no_loop, {"w"});
  CHECK(has_violation(r, "w", "w", S5Property::reflexive));

  CHECK_THROWS_AS(validate_s5(NamedRelations{{kA, {{"w", "x"}}}}, {"w"}), StructuralError);
}

TEST_CASE("s5_closure") {
  auto c = s5_closure(NamedRelations{{kA, {}}}, {"w"});
  CHECK(c.at(kA) == PairList{{"w", "w"}});
  c = s5_closure(NamedRelations{{kA, {{"w1", "w2"}}}}, {"w1", "w2"});
  CHECK(pairs(c, kA) == 4);
  c = s5_closure(NamedRelations{{kA, {{"w1", "w2"}, {"w2", "w3"}}}}, {"w1", "w2", "w3"});
  CHECK(pairs(c, kA) == 9);
  CHECK(validate_s5(c, {"w1", "w2", "w3"}).ok);
  CHECK(s5_closure(c, {"w1", "w2", "w3"}) == c);
}

TEST_CASE("property: closure always validates") {
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    std::size_t n = 1 + rng() % 6;
    std::vector<std::string> carrier;
    for (std::size_t k = 0; k < n; ++k) carrier.push_back("w" + std::to_string(k));
    PairList list;
    for (int k = 0; k < static_cast<int>(rng() % 8); ++k) list.emplace_back(carrier[rng() % n], carrier[rng() % n]);
    NamedRelations rel{{kA, list}};
    auto closed = s5_closure(rel, carrier);
    CHECK(validate_s5(closed, carrier).ok);
    CHECK(s5_closure(closed, carrier) == closed);
  }
}

TEST_CASE("make_semi_private") {
  const Formula p = Formula::atom(Prop("p"));
  auto shape = make_semi_private(top(), top(), {kB}, {kA, kB});
  CHECK(shape->model->size() == 2);
  CHECK(shape->designated == std::vector<Index>{0});
  CHECK(shape->model->relation(kA)->contains(0, 1));
  CHECK_FALSE(shape->model->relation(kB)->contains(0, 1));
  CHECK_FALSE(shape->model->has_postconditions());
  // Same shape as the coin flip once its postconditions are set aside.
  auto flip = coin_flip();
  CHECK(*flip->model->relation(kA) == *shape->model->relation(kA));
  CHECK(*flip->model->relation(kB) == *shape->model->relation(kB));

  auto both = make_semi_private(p, Formula::negation(p), {kA, kB}, {kA, kB});
  CHECK(both->model->relation(kA)->pair_count() == 2);
  CHECK(both->model->relation(kB)->pair_count() == 2);

  auto none = make_semi_private(p, Formula::negation(p), {}, {kA, kB});
  CHECK(none->model->relation(kA)->pair_count() == 4);
  CHECK(none->model->relation(kB)->pair_count() == 4);
  CHECK(none->model->pre(0) == p);

  CHECK_THROWS_AS(make_semi_private(p, p, {Agent("c")}, {kA, kB}), StructuralError);
}

TEST_CASE("property: semi-private announcements are two-event S5 models") {
  Rng rng(5);
  const std::vector<std::set<Agent>> subsets{{}, {kA}, {kB}, {kA, kB}};
  FormulaGenerator gen(rng, {{kA, kB}, props_named({"p", "q"})});
  for (int i = 0; i < 50; ++i) {
    auto e = make_semi_private(gen.update_free(2), gen.update_free(2), subsets[i % 4], {kA, kB});
    CHECK(e->model->size() == 2);
    CHECK(validate_s5(*e->model).ok);
  }
}

TEST_CASE("constructors reject dangling identifiers") {
  CHECK_THROWS_AS(make_model({"w"}, {{kA, {{"w", "v"}}}}, {}), StructuralError);
  CHECK_THROWS_AS(make_model({"w"}, {}, {{"v", {Prop("p")}}}), StructuralError);
  CHECK_THROWS_AS(make_model({"w", "w"}, {}, {}), StructuralError);
  CHECK_THROWS_AS(make_model({}, {}, {}), StructuralError);
  CHECK_THROWS_AS(make_event_model({"e"}, {{kA, {{"e", "f"}}}}, {}, {}), StructuralError);
  CHECK_THROWS_AS(make_event_model({"e"}, {}, {}, {{"e", {Literal{Prop("p"), false}, Literal{Prop("p"), true}}}}),
                  StructuralError);
  auto m = coin_model();
  CHECK_THROWS_AS(make_pointed(m, {5}, Pointedness::single), StructuralError);
  CHECK_THROWS_AS(make_pointed(m, {0, 1}, Pointedness::single), StructuralError);
  CHECK_THROWS_AS(make_pointed(m, {}, Pointedness::multi), StructuralError);
  CHECK_NOTHROW(make_pointed(m, {0, 1}, Pointedness::multi));
}

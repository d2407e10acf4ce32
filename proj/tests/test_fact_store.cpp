#include <algorithm>

#include "doctest.h"
#include "mission/errors.hpp"
#include "mission/fact.hpp"
#include "mission/fact_store.hpp"

using namespace mission;

namespace {

Fact window_fact(int idx, double conf) {
  return fact(ex("window/" + std::to_string(idx)), vocab::confidence,
              Literal::real(conf));
}

std::vector<Fact> window_entity(int idx, double conf) {
  EntityId w = ex("window/" + std::to_string(idx));
  return {
      fact(w, vocab::type, vocab::TimeWindow),
      fact(w, vocab::index, Literal::integer(idx)),
      fact(w, vocab::confidence, Literal::real(conf)),
      fact(w, vocab::durationHours, Literal::real(24.0)),
  };
}

}  // namespace

TEST_SUITE("fact_store") {

TEST_CASE("versions bump once per effective batch") {
  FactStore store;
  CHECK(store.version() == 0);
  CHECK(store.assert_facts(window_entity(0, 0.9)) == 1);
  CHECK(store.version() == 1);
  CHECK(store.assert_facts({}) == 1);  // empty batch: no new version
  // Re-asserting the identical fact changes nothing.
  CHECK(store.assert_facts({window_fact(0, 0.9)}) == 1);
  CHECK(store.assert_facts(window_entity(1, 0.8)) == 2);
}

TEST_CASE("enforce mode rejects type and bound violations atomically") {
  FactStore store;
  store.assert_facts(window_entity(0, 0.9));
  const std::size_t before = store.snapshot().fact_count();

  // Out-of-range confidence.
  CHECK_THROWS_AS(store.assert_facts({window_fact(0, 1.7)}), MissionError);
  // String where a real literal is declared.
  CHECK_THROWS_AS(store.assert_facts({fact(ex("window/0"), vocab::confidence,
                                           Literal::str("high"))}),
                  MissionError);
  // Entity where a literal is declared.
  CHECK_THROWS_AS(
      store.assert_facts({fact(ex("window/0"), vocab::confidence, ex("x"))}),
      MissionError);
  // A batch with one good and one bad fact must leave no trace of either.
  CHECK_THROWS_AS(
      store.assert_facts({window_fact(1, 0.5), window_fact(1, 1.7)}),
      MissionError);

  CHECK(store.snapshot().fact_count() == before);
  CHECK(store.version() == 1);
}

TEST_CASE("defer mode stages bad values for validate to report") {
  FactStore store;
  store.assert_facts(window_entity(0, 0.9));
  store.assert_facts({window_fact(0, 1.7)}, ShapeEnforcement::Defer);

  auto violations = store.snapshot().validate(default_shape_rules());
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].rule == "window-confidence");
  CHECK(violations[0].entity == ex("window/0"));

  // Repairing the value clears the report.
  store.assert_facts({window_fact(0, 0.4)});
  CHECK(store.snapshot().validate(default_shape_rules()).empty());
}

TEST_CASE("agent shape rule demands exactly one policy") {
  FactStore store;
  EntityId agent = ex("agent/alpha");
  EntityId caps = ex("caps/alpha");
  store.assert_facts({
      fact(agent, vocab::type, vocab::Agent),
      fact(agent, vocab::usesPolicy, ex("policy/FAST")),
      fact(agent, vocab::hasCapabilities, caps),
  });
  CHECK(store.snapshot().validate(default_shape_rules()).empty());

  // usesPolicy is multi-valued at the schema layer, so a second assignment
  // lands in the store and trips the shape rule.
  store.assert_facts({fact(agent, vocab::usesPolicy, ex("policy/SAFE"))});
  auto violations = store.snapshot().validate(default_shape_rules());
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].rule == "agent-single-policy");

  store.retract_facts({fact(agent, vocab::usesPolicy, ex("policy/SAFE"))});
  CHECK(store.snapshot().validate(default_shape_rules()).empty());
}

TEST_CASE("snapshots are immutable views") {
  FactStore store;
  store.assert_facts(window_entity(0, 0.9));
  WorldSnapshot old = store.snapshot();
  const std::size_t old_count = old.fact_count();

  store.assert_facts(window_entity(1, 0.8));
  CHECK(old.fact_count() == old_count);
  CHECK(old.version() == 1);
  CHECK(store.snapshot().version() == 2);
  CHECK(!old.has_entity(ex("window/1")));
  CHECK(store.snapshot().has_entity(ex("window/1")));
}

TEST_CASE("single-valued predicates replace on assert") {
  FactStore store;
  store.assert_facts(window_entity(0, 0.9));
  const std::int64_t v = store.assert_facts({window_fact(0, 0.5)});

  auto snap = store.snapshot();
  CHECK(snap.real_of(ex("window/0"), vocab::confidence) ==
        doctest::Approx(0.5));
  CHECK(snap.objects(ex("window/0"), vocab::confidence).size() == 1);

  // The change log carries a retract/assert pair at the same version.
  auto log = store.change_log();
  int retracts = 0, asserts = 0;
  for (const auto& rec : log) {
    if (rec.version != v) continue;
    if (rec.op == ChangeRecord::Op::Retract) ++retracts;
    if (rec.op == ChangeRecord::Op::Assert) ++asserts;
  }
  CHECK(retracts == 1);
  CHECK(asserts == 1);

  // Duplicate single-valued pairs inside one batch are ambiguous.
  CHECK_THROWS_AS(
      store.assert_facts({window_fact(0, 0.1), window_fact(0, 0.2)}),
      MissionError);
}

TEST_CASE("retracting an absent fact fails atomically") {
  FactStore store;
  store.assert_facts(window_entity(0, 0.9));
  const std::size_t before = store.snapshot().fact_count();
  CHECK_THROWS_AS(store.retract_facts({window_fact(0, 0.9),
                                       window_fact(3, 0.3)}),
                  MissionError);
  CHECK(store.snapshot().fact_count() == before);
}

TEST_CASE("pattern queries narrow on any bound position") {
  FactStore store;
  store.assert_facts(window_entity(0, 0.9));
  store.assert_facts(window_entity(1, 0.8));

  auto by_pred = store.snapshot().query(std::nullopt, vocab::confidence,
                                        std::nullopt);
  CHECK(by_pred.size() == 2);
  // Results arrive sorted by subject.
  CHECK(by_pred[0].subject == ex("window/0"));
  CHECK(by_pred[1].subject == ex("window/1"));

  auto by_obj = store.snapshot().query(std::nullopt, std::nullopt,
                                       Object{vocab::TimeWindow});
  CHECK(by_obj.size() == 2);

  CHECK_THROWS_AS(store.snapshot().query(std::nullopt, std::nullopt,
                                         std::nullopt),
                  MissionError);
  CHECK(store.snapshot()
            .query(ex("window/9"), std::nullopt, std::nullopt)
            .empty());
}

TEST_CASE("provenance closure reaches the transitive fixpoint") {
  FactStore store;
  store.assert_facts({
      fact(ex("tensor/a"), vocab::type, vocab::TensorArtifact),
      fact(ex("tensor/a"), vocab::wasDerivedFrom, ex("layer/base")),
      fact(ex("tensor/a"), vocab::wasGeneratedBy, ex("compile/1")),
      fact(ex("compile/1"), vocab::used, ex("policy/FAST")),
      fact(ex("layer/base"), vocab::wasDerivedFrom, ex("sensor/sst")),
      // Unrelated branch that must stay out of the closure.
      fact(ex("tensor/b"), vocab::wasDerivedFrom, ex("layer/other")),
  });

  auto trace = store.snapshot().provenance_trace(ex("tensor/a"));
  CHECK(trace ==
        std::set<EntityId>{ex("tensor/a"), ex("layer/base"), ex("compile/1"),
                           ex("policy/FAST"), ex("sensor/sst")});

  CHECK_THROWS_AS(store.snapshot().provenance_trace(ex("nowhere")),
                  MissionError);
  // Known entity with no provenance edges.
  store.assert_facts({fact(ex("plain"), vocab::status, Literal::str("ok"))});
  CHECK_THROWS_AS(store.snapshot().provenance_trace(ex("plain")),
                  MissionError);
}

TEST_CASE("dirty windows track touched windows since a version") {
  FactStore store;
  for (int t = 0; t < 7; ++t) store.assert_facts(window_entity(t, 0.9));
  const std::int64_t base = store.version();

  // Direct subject link: window/2's confidence.
  store.assert_facts({window_fact(2, 0.4)});
  CHECK(store.dirty_windows(base) == std::set<int>{2});

  // appliesIn links mark a span of windows.
  const std::int64_t mid = store.version();
  store.assert_facts({
      fact(ex("constraint/popup"), vocab::type, vocab::Constraint),
      fact(ex("constraint/popup"), vocab::kind, Literal::str("no_go")),
      fact(ex("constraint/popup"), vocab::asWKT,
           Literal::wkt("POLYGON ((0 0, 1 0, 1 1, 0 1, 0 0))")),
      fact(ex("constraint/popup"), vocab::appliesIn, Literal::integer(4)),
      fact(ex("constraint/popup"), vocab::appliesIn, Literal::integer(5)),
      fact(ex("constraint/popup"), vocab::appliesIn, Literal::integer(6)),
  });
  CHECK(store.dirty_windows(mid) == std::set<int>{4, 5, 6});
  CHECK(store.dirty_windows(base) == std::set<int>{2, 4, 5, 6});

  // A fact with no window affiliation is global: every known window.
  const std::int64_t late = store.version();
  store.assert_facts({fact(ex("policy/FAST"), vocab::alphaBase,
                           Literal::real(1.0))});
  CHECK(store.dirty_windows(late) == std::set<int>{0, 1, 2, 3, 4, 5, 6});

  CHECK(store.dirty_windows(store.version()).empty());
  CHECK_THROWS_AS(store.dirty_windows(store.version() + 1), MissionError);
}

TEST_CASE("retracting a constraint dirties the windows it applied in") {
  FactStore store;
  for (int t = 0; t < 4; ++t) store.assert_facts(window_entity(t, 0.9));
  store.assert_facts({
      fact(ex("constraint/c"), vocab::type, vocab::Constraint),
      fact(ex("constraint/c"), vocab::appliesIn, Literal::integer(1)),
  });
  const std::int64_t base = store.version();
  // After the retraction the link exists only in the pre-state; dirty
  // tracking must still see it.
  store.retract_facts(
      {fact(ex("constraint/c"), vocab::appliesIn, Literal::integer(1))});
  CHECK(store.dirty_windows(base) == std::set<int>{1});
}

TEST_CASE("fact lines round-trip including retraction and escapes") {
  const std::string text =
      "# header comment\n"
      "\n"
      "ex:window/0 ex:type ex:TimeWindow\n"
      "ex:window/0 ex:confidence \"0.5\"^^real\n"
      "ex:agent/a ex:status \"line one\\nwith \\\"quotes\\\" and \\\\slash\"\n"
      "- ex:window/0 ex:index \"3\"^^int\n"
      "ex:zone geo:asWKT \"POLYGON ((0 0, 1 0, 1 1, 0 0))\"^^wkt\n";
  auto lines = parse_fact_lines(text);
  REQUIRE(lines.size() == 5);
  CHECK(!lines[0].retract);
  CHECK(lines[3].retract);
  CHECK(as_literal(lines[2].fact.object).lexical ==
        "line one\nwith \"quotes\" and \\slash");
  CHECK(as_literal(lines[4].fact.object).kind == LiteralKind::Wkt);

  for (const auto& fl : lines) {
    const std::string rendered =
        (fl.retract ? "- " : "") + format_fact(fl.fact);
    auto back = parse_fact_line(rendered);
    REQUIRE(back.has_value());
    CHECK(back->retract == fl.retract);
    CHECK(back->fact == fl.fact);
  }

  // Numeric literals canonicalize, so equal values compare equal as text.
  auto a = parse_fact_line("ex:w ex:confidence \"0.50\"^^real");
  auto b = parse_fact_line("ex:w ex:confidence \"0.5\"^^real");
  CHECK(a->fact == b->fact);

  CHECK_THROWS_WITH_AS(parse_fact_lines("ex:a ex:b\nex:c ex:d 1^^int\n"),
                       doctest::Contains("line 1"), MissionError);
  CHECK_THROWS_AS(parse_fact_line("foo:bar ex:p ex:o"), MissionError);
  CHECK_THROWS_AS(parse_fact_line("ex:a ex:p \"unterminated"), MissionError);
  CHECK_THROWS_AS(parse_fact_line("ex:a ex:p \"x\"^^complex"), MissionError);
}

TEST_CASE("apply_lines commits assertions and retractions as one batch") {
  FactStore store;
  store.assert_facts(window_entity(0, 0.9));
  auto lines = parse_fact_lines(
      "- ex:window/0 ex:durationHours \"24\"^^real\n"
      "ex:window/0 ex:durationHours \"12\"^^real\n"
      "ex:window/0 ex:startTime \"2026-08-01T00:00:00Z\"^^datetime\n");
  const std::int64_t v = store.apply_lines(lines);
  CHECK(v == store.version());
  auto snap = store.snapshot();
  CHECK(snap.real_of(ex("window/0"), vocab::durationHours) ==
        doctest::Approx(12.0));
  CHECK(snap.string_of(ex("window/0"), vocab::startTime,
                       LiteralKind::DateTime) == "2026-08-01T00:00:00Z");
}

TEST_CASE("instances_of and known_windows") {
  FactStore store;
  store.assert_facts(window_entity(2, 0.9));
  store.assert_facts(window_entity(0, 0.9));
  store.assert_facts(window_entity(1, 0.9));
  auto instances = store.snapshot().instances_of(vocab::TimeWindow);
  REQUIRE(instances.size() == 3);
  CHECK(std::is_sorted(instances.begin(), instances.end()));
  CHECK(store.snapshot().known_windows() == std::set<int>{0, 1, 2});
}

}  // TEST_SUITE

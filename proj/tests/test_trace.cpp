#include <doctest.h>

#include <string>

#include "tact/rng.hpp"
#include "tact/trace.hpp"
#include "tact/world.hpp"

#include "test_util.hpp"

using namespace tact;
using namespace tact::testutil;

namespace {

QAItem cross_item(int k_seed = 3) {
  const WorldConfig w = noiseless_world_config();
  return make_item(w, Tier::CrossSensor, Attribute::Hardness, make_object(1, 0, 2, 2),
                   {SensorId::GsMini, SensorId::Tac3d}, static_cast<std::uint64_t>(k_seed));
}

std::string valid_text() {
  return "<perceive>\n"
         "sensor=gsmini hardness=1 roughness=0 protrusion=2 material=fabric\n"
         "sensor=tac3d hardness=1 roughness=0 protrusion=2 material=fabric\n"
         "</perceive>\n"
         "<compare>\n"
         "hardness=1 roughness=0 protrusion=2 material=fabric\n"
         "</compare>\n"
         "<conclude>\n"
         "answer=1\n"
         "</conclude>\n";
}

}  // namespace

TEST_CASE("well-formed three-segment text parses ok") {
  const ParsedTrace parsed = parse_trace(valid_text(), 3);
  CHECK(parsed.parse_ok);
  REQUIRE(parsed.perceive_lines.size() == 2);
  CHECK(parsed.perceive_lines[0].sensor == SensorId::GsMini);
  CHECK(parsed.perceive_lines[0].hardness == 1);
  CHECK(parsed.perceive_lines[0].roughness == 0);
  CHECK(parsed.perceive_lines[0].protrusion == 2);
  CHECK(parsed.perceive_lines[0].material == 2);  // fabric
  CHECK(parsed.compare_line.hardness == 1);
  CHECK(parsed.conclude_raw == "1");
}

TEST_CASE("missing closing tag fails the format predicate") {
  std::string text = valid_text();
  const auto pos = text.find("</compare>");
  text.erase(pos, std::string("</compare>\n").size());
  CHECK_FALSE(parse_trace(text, 3).parse_ok);
}

TEST_CASE("segments out of order fail the format predicate") {
  const std::string text =
      "<conclude>\nanswer=1\n</conclude>\n"
      "<perceive>\nsensor=gsmini hardness=1 roughness=0 protrusion=2\n</perceive>\n"
      "<compare>\nhardness=1 roughness=0 protrusion=2\n</compare>\n";
  CHECK_FALSE(parse_trace(text, 3).parse_ok);
}

TEST_CASE("whitespace outside segments is tolerated, junk is not") {
  CHECK(parse_trace("\n\n  " + valid_text() + "\n\t ", 3).parse_ok);
  CHECK_FALSE(parse_trace("x" + valid_text(), 3).parse_ok);
  CHECK_FALSE(parse_trace(valid_text() + "trailing", 3).parse_ok);
}

TEST_CASE("out-of-range levels are flagged unparsable, not guessed") {
  std::string text = valid_text();
  const auto pos = text.find("hardness=1");
  text.replace(pos, 10, "hardness=7");
  const ParsedTrace parsed = parse_trace(text, 3);
  CHECK(parsed.parse_ok);  // format is still fine
  CHECK_FALSE(parsed.perceive_lines[0].hardness.has_value());
  CHECK(parsed.perceive_lines[0].roughness.has_value());
}

TEST_CASE("duplicated keys within a line are unparsable") {
  const std::string text =
      "<perceive>\nsensor=gsmini hardness=1 hardness=2 roughness=0 protrusion=2\n</perceive>\n"
      "<compare>\nhardness=1 roughness=0 protrusion=2\n</compare>\n"
      "<conclude>\nanswer=1\n</conclude>\n";
  const ParsedTrace parsed = parse_trace(text, 3);
  CHECK(parsed.parse_ok);
  CHECK_FALSE(parsed.perceive_lines[0].hardness.has_value());
}

TEST_CASE("render/parse round trip recovers every slot exactly") {
  const QAItem item = cross_item();
  const int K = 3;
  // exhaustive over slot levels and the answer level
  for (int h = 0; h < K; ++h) {
    for (int r = 0; r < K; ++r) {
      for (int p = 0; p < K; ++p) {
        for (int ans = 0; ans < K; ++ans) {
          TraceSlots slots;
          slots.template_id = 0;
          TraceLine line;
          line.hardness = h;
          line.roughness = r;
          line.protrusion = p;
          line.material = (h + r + p) % kNumMaterials;
          TraceLine a = line;
          a.sensor = item.sensors[0];
          TraceLine b = line;
          b.sensor = item.sensors[1];
          slots.perceive = {a, b};
          slots.compare = line;
          slots.answer = Answer::make_level(ans);
          const std::string text = render_trace(item, slots);
          const ParsedTrace parsed = parse_trace(text, K);
          REQUIRE(parsed.parse_ok);
          CHECK(parsed.perceive_value(item.sensors[0], Attribute::Hardness) == h);
          CHECK(parsed.perceive_value(item.sensors[1], Attribute::Roughness) == r);
          CHECK(parsed.compare_line.protrusion == p);
          CHECK(parsed.compare_line.material == (h + r + p) % kNumMaterials);
          const auto answer = extract_answer(parsed, item, K);
          REQUIRE(answer.has_value());
          CHECK(*answer == Answer::make_level(ans));
        }
      }
    }
  }
}

TEST_CASE("corrupted templates each violate the format predicate") {
  const QAItem item = cross_item();
  TraceSlots slots = oracle_slots(item);
  for (int t = 1; t < kNumTemplates; ++t) {
    slots.template_id = t;
    const std::string text = render_trace(item, slots);
    CHECK_FALSE(parse_trace(text, 3).parse_ok);
  }
  slots.template_id = 0;
  CHECK(parse_trace(render_trace(item, slots), 3).parse_ok);
  slots.template_id = 99;
  CHECK_THROWS_AS(render_trace(item, slots), std::invalid_argument);
}

TEST_CASE("template 4 puts non-whitespace before the first tag") {
  const QAItem item = cross_item();
  TraceSlots slots = oracle_slots(item);
  slots.template_id = 4;
  const std::string text = render_trace(item, slots);
  CHECK(text.find('<') > 0);
  CHECK_FALSE(parse_trace(text, 3).parse_ok);
}

TEST_CASE("extract_answer is typed by tier and range-checked") {
  const WorldConfig w = noiseless_world_config();
  const ObjectSpec obj = make_object(2, 1, 0, 2);

  const auto parse_with_answer = [](const std::string& value) {
    return parse_trace("<perceive>\nsensor=gsmini hardness=0 roughness=0 protrusion=0\n"
                       "</perceive>\n<compare>\nhardness=0 roughness=0 protrusion=0\n"
                       "</compare>\n<conclude>\nanswer=" + value + "\n</conclude>\n",
                       3);
  };

  const QAItem ordinal = make_item(w, Tier::Property, Attribute::Hardness, obj,
                                   {SensorId::GsMini});
  CHECK(*extract_answer(parse_with_answer("2"), ordinal, 3) == Answer::make_level(2));
  CHECK_FALSE(extract_answer(parse_with_answer("5"), ordinal, 3).has_value());
  CHECK_FALSE(extract_answer(parse_with_answer("x"), ordinal, 3).has_value());

  const QAItem material = make_item(w, Tier::Property, Attribute::Material, obj,
                                    {SensorId::GsMini});
  CHECK(*extract_answer(parse_with_answer("fabric"), material, 3) ==
        Answer::make_material(2));
  CHECK_FALSE(extract_answer(parse_with_answer("granite"), material, 3).has_value());

  const QAItem tuple = make_item(w, Tier::OrdinalCompositional, Attribute::Hardness, obj,
                                 {SensorId::GsMini});
  CHECK(*extract_answer(parse_with_answer("2,1,0"), tuple, 3) == Answer::make_tuple(2, 1, 0));
  CHECK_FALSE(extract_answer(parse_with_answer("2,1"), tuple, 3).has_value());
  CHECK_FALSE(extract_answer(parse_with_answer("2,1,3"), tuple, 3).has_value());

  QAItem pairwise;
  pairwise.tier = Tier::ComparativePairwise;
  pairwise.attribute = Attribute::Hardness;
  pairwise.objects = {obj, make_object(0, 1, 0, 3)};
  pairwise.sensors = {SensorId::GsMini};
  CHECK(*extract_answer(parse_with_answer("first"), pairwise, 3) == Answer::make_pair(0));
  CHECK(*extract_answer(parse_with_answer("second"), pairwise, 3) == Answer::make_pair(1));
  CHECK_FALSE(extract_answer(parse_with_answer("both"), pairwise, 3).has_value());

  QAItem listwise;
  listwise.tier = Tier::ComparativeListwise;
  listwise.attribute = Attribute::Hardness;
  listwise.objects = {obj, make_object(0, 1, 0, 3), make_object(1, 1, 0, 4)};
  listwise.sensors = {SensorId::GsMini};
  CHECK(*extract_answer(parse_with_answer("2,0,1"), listwise, 3) ==
        Answer::make_perm({2, 0, 1}));
  CHECK_FALSE(extract_answer(parse_with_answer("2,0,0"), listwise, 3).has_value());
  CHECK_FALSE(extract_answer(parse_with_answer("2,0"), listwise, 3).has_value());
}

TEST_CASE("parser is total and pure over random byte strings") {
  Rng rng(20240817);
  for (int i = 0; i < 10000; ++i) {
    const int len = rng.uniform_int(160);
    std::string s;
    s.reserve(static_cast<std::size_t>(len));
    for (int c = 0; c < len; ++c) {
      s.push_back(static_cast<char>(rng.uniform_int(256)));
    }
    const ParsedTrace first = parse_trace(s, 3);
    const ParsedTrace second = parse_trace(s, 3);
    CHECK(first.parse_ok == second.parse_ok);
    CHECK((first.parse_ok == true || first.parse_ok == false));
  }
}

TEST_CASE("fuzzed tag fragments never crash and stay binary") {
  Rng rng(99);
  const std::array<std::string, 8> pieces = {
      "<perceive>", "</perceive>", "<compare>", "</compare>",
      "<conclude>", "</conclude>", "answer=1\n", "sensor=gsmini hardness=1\n"};
  for (int i = 0; i < 5000; ++i) {
    std::string s;
    const int parts = rng.uniform_int(10);
    for (int k = 0; k < parts; ++k) {
      s += pieces[static_cast<std::size_t>(rng.uniform_int(8))];
    }
    const double fmt = parse_trace(s, 3).parse_ok ? 1.0 : 0.0;
    CHECK((fmt == 0.0 || fmt == 1.0));
  }
}

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "shapecap/captiongen.hpp"
#include "shapecap/errors.hpp"
#include "shapecap/oracle.hpp"
#include "shapecap/render.hpp"
#include "shapecap/rng.hpp"
#include "shapecap/semantics.hpp"
#include "shapecap/world.hpp"

namespace shapecap {

using ordered_json = nlohmann::ordered_json;

enum class Split : std::uint8_t { train, validation, test };

inline constexpr std::array<Split, 3> kAllSplits = {Split::train,
                                                    Split::validation,
                                                    Split::test};

inline const char* to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::validation: return "validation";
    case Split::test: return "test";
  }
  return "?";
}

inline std::optional<Split> split_from_string(const std::string& s) {
  for (Split k : kAllSplits)
    if (s == to_string(k)) return k;
  return std::nullopt;
}

// Fixed per-split xor tags keep the three seed streams decorrelated
// under one master seed.
inline constexpr std::uint64_t split_tag(Split s) {
  switch (s) {
    case Split::train: return 0x517A5EED00000001ULL;
    case Split::validation: return 0x517A5EED00000002ULL;
    case Split::test: return 0x517A5EED00000003ULL;
  }
  return 0;
}

// Instance ids are unique across splits; images and predictions key on
// them. Bases are independent of per-split counts so that growing one
// split never renumbers another (prefix property).
inline constexpr std::int64_t kSplitIdBase = 100000000;
inline constexpr std::int64_t instance_id(Split s, std::int64_t index) {
  return static_cast<std::int64_t>(s) * kSplitIdBase + index;
}

// Train/test distribution shift: combinations banned from train worlds
// and captions, plus caption kinds reserved for the test split.
struct SplitSpec {
  std::vector<ShapeColor> train_excluded_combinations;
  std::vector<CaptionKind> test_only_kinds;
  double shared_fraction = 1.0;  // test instances drawn from the shared mix

  bool operator==(const SplitSpec&) const = default;
};

struct ImageSpec {
  int width = 64;
  int height = 64;
  int supersample = 4;

  bool operator==(const ImageSpec&) const = default;
};

inline std::map<CaptionKind, double> uniform_caption_mix() {
  std::map<CaptionKind, double> mix;
  for (CaptionKind k : kAllCaptionKinds) mix[k] = 1.0;
  return mix;
}

struct DatasetConfig {
  WorldSpec world_spec;
  std::map<CaptionKind, double> caption_kind_mix = uniform_caption_mix();
  double true_fraction = 0.5;
  ImageSpec image;
  double clarity_margin = 0.05;
  std::int64_t count_train = 10000;
  std::int64_t count_validation = 1000;
  std::int64_t count_test = 1000;
  std::uint64_t master_seed = 0;
  SplitSpec split_spec;

  bool operator==(const DatasetConfig&) const = default;

  std::int64_t count_for(Split s) const {
    switch (s) {
      case Split::train: return count_train;
      case Split::validation: return count_validation;
      case Split::test: return count_test;
    }
    return 0;
  }

  std::vector<std::string> validation_errors() const {
    std::vector<std::string> errs = world_spec.validation_errors();
    if (!(true_fraction > 0.0 && true_fraction < 1.0))
      errs.push_back("true_fraction must be in (0, 1)");
    if (count_train < 0 || count_validation < 0 || count_test < 0 ||
        count_train + count_validation + count_test < 1)
      errs.push_back("at least one instance must be requested");
    if (count_train >= kSplitIdBase || count_validation >= kSplitIdBase ||
        count_test >= kSplitIdBase)
      errs.push_back("per-split count exceeds the id space");
    if (image.width < 1 || image.height < 1)
      errs.push_back("image dimensions must be positive");
    if (image.supersample < 1 || image.supersample > 8)
      errs.push_back("supersample must be in [1, 8]");
    if (clarity_margin < 0.0) errs.push_back("clarity_margin negative");
    double total = 0.0;
    for (const auto& [kind, w] : caption_kind_mix) {
      if (w < 0.0) errs.push_back("negative caption kind weight");
      total += w;
    }
    if (total <= 0.0) errs.push_back("caption kind weights sum to zero");
    bool any_shared = false;
    for (CaptionKind k : kAllCaptionKinds) {
      const bool held_out =
          std::find(split_spec.test_only_kinds.begin(),
                    split_spec.test_only_kinds.end(),
                    k) != split_spec.test_only_kinds.end();
      if (held_out) continue;
      const auto it = caption_kind_mix.find(k);
      const double w = it == caption_kind_mix.end() ? 0.0 : it->second;
      if (w > 0.0) any_shared = true;
    }
    if (!any_shared)
      errs.push_back("test_only_kinds leave no caption kinds for train");
    if (split_spec.shared_fraction < 0.0 || split_spec.shared_fraction > 1.0)
      errs.push_back("shared_fraction must be in [0, 1]");
    {
      auto remaining = world_spec.allowed_combinations();
      std::erase_if(remaining, [&](const ShapeColor& sc) {
        return std::find(split_spec.train_excluded_combinations.begin(),
                         split_spec.train_excluded_combinations.end(),
                         sc) != split_spec.train_excluded_combinations.end();
      });
      if (remaining.size() < 2)
        errs.push_back("train exclusions leave fewer than 2 combinations");
    }
    return errs;
  }
};

// One dataset record, as stored on one line of {split}.jsonl.
struct Instance {
  std::int64_t id = 0;
  Split split = Split::train;
  CaptionKind kind = CaptionKind::existential;
  bool label = false;
  std::string caption;
  std::string image_ref;
  CaptionAst ast;
  WorldModel world;
};

// --- JSON mapping ----------------------------------------------------------

namespace detail {

inline ordered_json restrictor_to_json(const Restrictor& r) {
  ordered_json j;
  j["shape"] = r.shape ? ordered_json(to_string(*r.shape)) : nullptr;
  j["color"] = r.color ? ordered_json(to_string(*r.color)) : nullptr;
  return j;
}

inline Restrictor restrictor_from_json(const ordered_json& j) {
  Restrictor r;
  if (!j.at("shape").is_null()) {
    r.shape = shape_from_string(j.at("shape").get<std::string>());
    if (!r.shape) throw MalformedRecord("unknown shape in restrictor");
  }
  if (!j.at("color").is_null()) {
    r.color = color_from_string(j.at("color").get<std::string>());
    if (!r.color) throw MalformedRecord("unknown color in restrictor");
  }
  return r;
}

inline ordered_json body_to_json(const Body& b) {
  ordered_json j;
  if (const auto* attr = std::get_if<AttributeBody>(&b)) {
    j["pred"] = "attribute";
    j["shape"] = attr->shape ? ordered_json(to_string(*attr->shape)) : nullptr;
    j["color"] = attr->color ? ordered_json(to_string(*attr->color)) : nullptr;
    return j;
  }
  const auto& rel = std::get<RelationBody>(b);
  j["pred"] = "relation";
  j["relation"] = to_string(rel.relation);
  j["landmark"] = restrictor_to_json(rel.landmark);
  return j;
}

inline Body body_from_json(const ordered_json& j) {
  const std::string pred = j.at("pred").get<std::string>();
  if (pred == "attribute") {
    AttributeBody b;
    if (!j.at("shape").is_null()) {
      b.shape = shape_from_string(j.at("shape").get<std::string>());
      if (!b.shape) throw MalformedRecord("unknown shape in body");
    }
    if (!j.at("color").is_null()) {
      b.color = color_from_string(j.at("color").get<std::string>());
      if (!b.color) throw MalformedRecord("unknown color in body");
    }
    return Body{b};
  }
  if (pred != "relation") throw MalformedRecord("unknown body predicate");
  RelationBody b;
  const std::string rel = j.at("relation").get<std::string>();
  if (rel == "above")
    b.relation = Relation::above;
  else if (rel == "below")
    b.relation = Relation::below;
  else if (rel == "left_of")
    b.relation = Relation::left_of;
  else if (rel == "right_of")
    b.relation = Relation::right_of;
  else
    throw MalformedRecord("unknown relation kind");
  b.landmark = restrictor_from_json(j.at("landmark"));
  return Body{b};
}

inline ordered_json rational_to_json(const Rational& r) {
  if (r.den == 1) return ordered_json(r.num);
  ordered_json j;
  j["num"] = r.num;
  j["den"] = r.den;
  return j;
}

inline Rational rational_from_json(const ordered_json& j) {
  if (j.is_number_integer()) return Rational(j.get<std::int64_t>());
  return Rational(j.at("num").get<std::int64_t>(),
                  j.at("den").get<std::int64_t>());
}

inline std::optional<Comparison> comparison_from_string(const std::string& s) {
  for (int i = 0; i < 6; ++i)
    if (s == to_string(static_cast<Comparison>(i)))
      return static_cast<Comparison>(i);
  return std::nullopt;
}

inline ordered_json clause_to_json(const Clause& clause) {
  return std::visit(
      [](const auto& c) -> ordered_json {
        using T = std::decay_t<decltype(c)>;
        ordered_json j;
        if constexpr (std::is_same_v<T, Existential>) {
          j["op"] = "existential";
          j["restrictor"] = restrictor_to_json(c.restrictor);
          j["body"] = body_to_json(c.body);
        } else if constexpr (std::is_same_v<T, NegatedExistential>) {
          j["op"] = "negated_existential";
          j["restrictor"] = restrictor_to_json(c.restrictor);
          j["body"] = body_to_json(c.body);
        } else if constexpr (std::is_same_v<T, Quantified>) {
          j["op"] = "quantified";
          ordered_json q;
          q["kind"] =
              c.qspec.kind == QuantifierKind::count ? "count" : "fraction";
          q["cmp"] = to_string(c.qspec.comparison);
          q["value"] = rational_to_json(c.qspec.value);
          q["of"] = c.qspec.restrictor_count
                        ? ordered_json(*c.qspec.restrictor_count)
                        : nullptr;
          j["qspec"] = q;
          j["restrictor"] = restrictor_to_json(c.restrictor);
          j["body"] = body_to_json(c.body);
        } else {
          j["op"] = "comparative";
          ordered_json s;
          s["ratio"] = rational_to_json(c.cspec.ratio);
          s["cmp"] = to_string(c.cspec.comparison);
          j["cspec"] = s;
          j["restrictor_a"] = restrictor_to_json(c.restrictor_a);
          j["restrictor_b"] = restrictor_to_json(c.restrictor_b);
          j["body"] = body_to_json(c.body);
        }
        return j;
      },
      clause);
}

inline Clause clause_from_json(const ordered_json& j) {
  const std::string op = j.at("op").get<std::string>();
  if (op == "existential")
    return Existential{restrictor_from_json(j.at("restrictor")),
                       body_from_json(j.at("body"))};
  if (op == "negated_existential")
    return NegatedExistential{restrictor_from_json(j.at("restrictor")),
                              body_from_json(j.at("body"))};
  if (op == "quantified") {
    const auto& qj = j.at("qspec");
    QSpec q;
    const std::string kind = qj.at("kind").get<std::string>();
    if (kind == "count")
      q.kind = QuantifierKind::count;
    else if (kind == "fraction")
      q.kind = QuantifierKind::fraction;
    else
      throw MalformedRecord("unknown quantifier kind");
    const auto cmp = comparison_from_string(qj.at("cmp").get<std::string>());
    if (!cmp) throw MalformedRecord("unknown comparison");
    q.comparison = *cmp;
    q.value = rational_from_json(qj.at("value"));
    if (!qj.at("of").is_null()) q.restrictor_count = qj.at("of").get<int>();
    return Quantified{q, restrictor_from_json(j.at("restrictor")),
                      body_from_json(j.at("body"))};
  }
  if (op == "comparative") {
    const auto& sj = j.at("cspec");
    const auto cmp = comparison_from_string(sj.at("cmp").get<std::string>());
    if (!cmp) throw MalformedRecord("unknown comparison");
    return Comparative{CompSpec{rational_from_json(sj.at("ratio")), *cmp},
                       restrictor_from_json(j.at("restrictor_a")),
                       restrictor_from_json(j.at("restrictor_b")),
                       body_from_json(j.at("body"))};
  }
  throw MalformedRecord("unknown clause op '" + op + "'");
}

}  // namespace detail

inline ordered_json ast_to_json(const CaptionAst& ast) {
  if (!ast.conjunct) return detail::clause_to_json(ast.head);
  ordered_json j;
  j["op"] = "and";
  j["left"] = detail::clause_to_json(ast.head);
  j["right"] = detail::clause_to_json(*ast.conjunct);
  return j;
}

inline CaptionAst ast_from_json(const ordered_json& j) {
  if (j.at("op").get<std::string>() == "and")
    return make_conjunction(detail::clause_from_json(j.at("left")),
                            detail::clause_from_json(j.at("right")));
  return make_caption(detail::clause_from_json(j));
}

inline ordered_json world_to_json(const WorldModel& w) {
  ordered_json j;
  j["background"] = to_string(w.background);
  j["seed"] = w.seed_trace;
  ordered_json entities = ordered_json::array();
  for (const Entity& e : w.entities) {
    ordered_json je;
    je["shape"] = to_string(e.shape);
    je["color"] = to_string(e.color);
    je["x"] = e.x;
    je["y"] = e.y;
    je["rotation"] = e.rotation;
    je["sx"] = e.sx;
    je["sy"] = e.sy;
    je["shade"] = e.shade;
    entities.push_back(std::move(je));
  }
  j["entities"] = std::move(entities);
  return j;
}

inline WorldModel world_from_json(const ordered_json& j) {
  WorldModel w;
  const auto bg = color_from_string(j.at("background").get<std::string>());
  if (!bg) throw MalformedRecord("unknown background color");
  w.background = *bg;
  w.seed_trace = j.at("seed").get<std::uint64_t>();
  for (const auto& je : j.at("entities")) {
    Entity e;
    const auto s = shape_from_string(je.at("shape").get<std::string>());
    const auto c = color_from_string(je.at("color").get<std::string>());
    if (!s || !c) throw MalformedRecord("unknown entity attribute");
    e.shape = *s;
    e.color = *c;
    e.x = je.at("x").get<double>();
    e.y = je.at("y").get<double>();
    e.rotation = je.at("rotation").get<double>();
    e.sx = je.at("sx").get<double>();
    e.sy = je.at("sy").get<double>();
    e.shade = je.at("shade").get<double>();
    w.entities.push_back(e);
  }
  return w;
}

// One record per line; key order is fixed so identical instances always
// serialize to identical bytes.
inline std::string serialize_instance(const Instance& inst) {
  ordered_json j;
  j["id"] = inst.id;
  j["split"] = to_string(inst.split);
  j["kind"] = to_string(inst.kind);
  j["label"] = inst.label ? 1 : 0;
  j["caption"] = inst.caption;
  j["image_ref"] = inst.image_ref;
  j["ast"] = ast_to_json(inst.ast);
  j["world"] = world_to_json(inst.world);
  return j.dump() + "\n";
}

inline Instance deserialize_instance(const std::string& line) {
  ordered_json j;
  try {
    j = ordered_json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw MalformedRecord(std::string("record is not valid JSON: ") +
                          e.what());
  }
  try {
    Instance inst;
    inst.id = j.at("id").get<std::int64_t>();
    const auto split = split_from_string(j.at("split").get<std::string>());
    if (!split) throw MalformedRecord("unknown split");
    inst.split = *split;
    const auto kind =
        caption_kind_from_string(j.at("kind").get<std::string>());
    if (!kind) throw MalformedRecord("unknown caption kind");
    inst.kind = *kind;
    const int label = j.at("label").get<int>();
    if (label != 0 && label != 1) throw MalformedRecord("label must be 0/1");
    inst.label = label == 1;
    inst.caption = j.at("caption").get<std::string>();
    inst.image_ref = j.at("image_ref").get<std::string>();
    inst.ast = ast_from_json(j.at("ast"));
    inst.world = world_from_json(j.at("world"));
    return inst;
  } catch (const nlohmann::json::exception& e) {
    throw MalformedRecord(std::string("record misses a field: ") + e.what());
  }
}

// --- config file mapping ----------------------------------------------------

namespace detail {

inline ordered_json combo_to_json(const ShapeColor& sc) {
  ordered_json j;
  j["shape"] = to_string(sc.first);
  j["color"] = to_string(sc.second);
  return j;
}

inline ShapeColor combo_from_json(const ordered_json& j) {
  const auto s = shape_from_string(j.at("shape").get<std::string>());
  const auto c = color_from_string(j.at("color").get<std::string>());
  if (!s || !c) throw ConfigError("unknown shape or color in combination");
  return ShapeColor{*s, *c};
}

inline void reject_unknown_keys(const ordered_json& j,
                                std::initializer_list<const char*> known,
                                const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* k : known)
      if (key == k) ok = true;
    if (!ok)
      throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

}  // namespace detail

inline ordered_json config_to_json(const DatasetConfig& c) {
  ordered_json j;
  j["master_seed"] = c.master_seed;
  ordered_json counts;
  counts["train"] = c.count_train;
  counts["validation"] = c.count_validation;
  counts["test"] = c.count_test;
  j["counts"] = counts;
  j["true_fraction"] = c.true_fraction;
  j["clarity_margin"] = c.clarity_margin;
  ordered_json img;
  img["width"] = c.image.width;
  img["height"] = c.image.height;
  img["supersample"] = c.image.supersample;
  j["image"] = img;
  ordered_json w;
  {
    ordered_json shapes = ordered_json::array();
    for (Shape s : c.world_spec.vocabulary.shapes) shapes.push_back(to_string(s));
    ordered_json colors = ordered_json::array();
    for (Color col : c.world_spec.vocabulary.colors)
      colors.push_back(to_string(col));
    w["shapes"] = shapes;
    w["colors"] = colors;
    w["entity_count"] = {c.world_spec.min_entities, c.world_spec.max_entities};
    w["extent_range"] = {c.world_spec.min_extent, c.world_spec.max_extent};
    w["min_separation"] = c.world_spec.min_separation;
    ordered_json excluded = ordered_json::array();
    for (const auto& sc : c.world_spec.excluded_combinations)
      excluded.push_back(detail::combo_to_json(sc));
    w["excluded_combinations"] = excluded;
    ordered_json forced = ordered_json::array();
    for (const auto& sc : c.world_spec.forced_combinations)
      forced.push_back(detail::combo_to_json(sc));
    w["forced_combinations"] = forced;
  }
  j["world"] = w;
  ordered_json mix;
  for (CaptionKind k : kAllCaptionKinds) {
    const auto it = c.caption_kind_mix.find(k);
    mix[to_string(k)] = it == c.caption_kind_mix.end() ? 0.0 : it->second;
  }
  j["caption_kinds"] = mix;
  ordered_json split;
  {
    ordered_json excluded = ordered_json::array();
    for (const auto& sc : c.split_spec.train_excluded_combinations)
      excluded.push_back(detail::combo_to_json(sc));
    split["train_excluded_combinations"] = excluded;
    ordered_json kinds = ordered_json::array();
    for (CaptionKind k : c.split_spec.test_only_kinds)
      kinds.push_back(to_string(k));
    split["test_only_kinds"] = kinds;
    split["shared_fraction"] = c.split_spec.shared_fraction;
  }
  j["split"] = split;
  return j;
}

// Parses a (possibly partial) config file; absent keys keep defaults,
// unknown keys are an error.
inline DatasetConfig config_from_json(const ordered_json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  detail::reject_unknown_keys(
      j,
      {"master_seed", "counts", "true_fraction", "clarity_margin", "image",
       "world", "caption_kinds", "split"},
      "config");
  DatasetConfig c;
  try {
    if (j.contains("master_seed"))
      c.master_seed = j.at("master_seed").get<std::uint64_t>();
    if (j.contains("counts")) {
      const auto& counts = j.at("counts");
      detail::reject_unknown_keys(counts, {"train", "validation", "test"},
                                  "counts");
      if (counts.contains("train"))
        c.count_train = counts.at("train").get<std::int64_t>();
      if (counts.contains("validation"))
        c.count_validation = counts.at("validation").get<std::int64_t>();
      if (counts.contains("test"))
        c.count_test = counts.at("test").get<std::int64_t>();
    }
    if (j.contains("true_fraction"))
      c.true_fraction = j.at("true_fraction").get<double>();
    if (j.contains("clarity_margin"))
      c.clarity_margin = j.at("clarity_margin").get<double>();
    if (j.contains("image")) {
      const auto& img = j.at("image");
      detail::reject_unknown_keys(img, {"width", "height", "supersample"},
                                  "image");
      if (img.contains("width")) c.image.width = img.at("width").get<int>();
      if (img.contains("height")) c.image.height = img.at("height").get<int>();
      if (img.contains("supersample"))
        c.image.supersample = img.at("supersample").get<int>();
    }
    if (j.contains("world")) {
      const auto& w = j.at("world");
      detail::reject_unknown_keys(
          w,
          {"shapes", "colors", "entity_count", "extent_range",
           "min_separation", "excluded_combinations", "forced_combinations"},
          "world");
      if (w.contains("shapes")) {
        c.world_spec.vocabulary.shapes.clear();
        for (const auto& s : w.at("shapes")) {
          const auto k = shape_from_string(s.get<std::string>());
          if (!k) throw ConfigError("unknown shape '" + s.get<std::string>() + "'");
          c.world_spec.vocabulary.shapes.push_back(*k);
        }
      }
      if (w.contains("colors")) {
        c.world_spec.vocabulary.colors.clear();
        for (const auto& s : w.at("colors")) {
          const auto k = color_from_string(s.get<std::string>());
          if (!k || *k == Color::black)
            throw ConfigError("unknown entity color '" + s.get<std::string>() +
                              "'");
          c.world_spec.vocabulary.colors.push_back(*k);
        }
      }
      if (w.contains("entity_count")) {
        c.world_spec.min_entities = w.at("entity_count").at(0).get<int>();
        c.world_spec.max_entities = w.at("entity_count").at(1).get<int>();
      }
      if (w.contains("extent_range")) {
        c.world_spec.min_extent = w.at("extent_range").at(0).get<double>();
        c.world_spec.max_extent = w.at("extent_range").at(1).get<double>();
      }
      if (w.contains("min_separation"))
        c.world_spec.min_separation = w.at("min_separation").get<double>();
      if (w.contains("excluded_combinations"))
        for (const auto& sc : w.at("excluded_combinations"))
          c.world_spec.excluded_combinations.push_back(
              detail::combo_from_json(sc));
      if (w.contains("forced_combinations"))
        for (const auto& sc : w.at("forced_combinations"))
          c.world_spec.forced_combinations.push_back(
              detail::combo_from_json(sc));
    }
    if (j.contains("caption_kinds")) {
      // an explicit mix replaces the uniform default entirely
      c.caption_kind_mix.clear();
      for (const auto& [key, value] : j.at("caption_kinds").items()) {
        const auto k = caption_kind_from_string(key);
        if (!k) throw ConfigError("unknown caption kind '" + key + "'");
        c.caption_kind_mix[*k] = value.get<double>();
      }
    }
    if (j.contains("split")) {
      const auto& s = j.at("split");
      detail::reject_unknown_keys(
          s,
          {"train_excluded_combinations", "test_only_kinds",
           "shared_fraction"},
          "split");
      if (s.contains("train_excluded_combinations"))
        for (const auto& sc : s.at("train_excluded_combinations"))
          c.split_spec.train_excluded_combinations.push_back(
              detail::combo_from_json(sc));
      if (s.contains("test_only_kinds"))
        for (const auto& k : s.at("test_only_kinds")) {
          const auto kind = caption_kind_from_string(k.get<std::string>());
          if (!kind)
            throw ConfigError("unknown caption kind '" +
                              k.get<std::string>() + "'");
          c.split_spec.test_only_kinds.push_back(*kind);
        }
      if (s.contains("shared_fraction"))
        c.split_spec.shared_fraction = s.at("shared_fraction").get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config field has the wrong type: ") +
                      e.what());
  }
  return c;
}

inline DatasetConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  ordered_json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return config_from_json(j);
}

// --- generation -------------------------------------------------------------

namespace detail {

struct SplitSetup {
  WorldSpec world_spec;
  CaptionGenerator generator;
  std::vector<double> shared_weights;    // aligned with kAllCaptionKinds
  std::vector<double> heldout_weights;   // nonzero only for test_only kinds
  double shared_fraction = 1.0;
};

inline SplitSetup split_setup(const DatasetConfig& config, Split split) {
  SplitSetup s;
  s.world_spec = config.world_spec;
  const bool shifted = split != Split::test;
  if (shifted)
    for (const auto& sc : config.split_spec.train_excluded_combinations)
      s.world_spec.excluded_combinations.push_back(sc);

  s.generator = CaptionGenerator(config.world_spec.vocabulary,
                                 config.clarity_margin);
  s.generator.allowed_mentions = s.world_spec.allowed_combinations();

  auto base_weight = [&](CaptionKind k) {
    const auto it = config.caption_kind_mix.find(k);
    return it == config.caption_kind_mix.end() ? 0.0 : it->second;
  };
  for (CaptionKind k : kAllCaptionKinds) {
    const bool held_out =
        std::find(config.split_spec.test_only_kinds.begin(),
                  config.split_spec.test_only_kinds.end(),
                  k) != config.split_spec.test_only_kinds.end();
    const double w = base_weight(k);
    s.shared_weights.push_back(held_out ? 0.0 : w);
    s.heldout_weights.push_back(held_out ? (w > 0.0 ? w : 1.0) : 0.0);
  }
  const double heldout_total =
      std::accumulate(s.heldout_weights.begin(), s.heldout_weights.end(), 0.0);
  s.shared_fraction = (split == Split::test && heldout_total > 0.0)
                          ? config.split_spec.shared_fraction
                          : 1.0;
  return s;
}

inline CaptionKind draw_kind(const std::vector<double>& weights, Rng& rng) {
  const double total =
      std::accumulate(weights.begin(), weights.end(), 0.0);
  double x = rng.next_unit() * total;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    x -= weights[i];
    if (x < 0.0) return kAllCaptionKinds[i];
  }
  return kAllCaptionKinds.back();
}

inline constexpr int kInstanceRetries = 20;

}  // namespace detail

// Builds instance `index` of `split` from first principles; depends only
// on the config, the split and the index, never on other instances.
inline Instance generate_instance(const DatasetConfig& config,
                                  const detail::SplitSetup& setup, Split split,
                                  std::int64_t index) {
  const std::uint64_t seed =
      derive_seed(config.master_seed ^ split_tag(split),
                  static_cast<std::uint64_t>(index));
  Rng rng(seed);
  // kind and target are fixed per instance; only the world is resampled
  // on retry, so failures cannot skew the kind/label joint distribution
  const bool target = rng.next_bool(config.true_fraction);
  const bool shared = rng.next_bool(setup.shared_fraction);
  const CaptionKind kind = detail::draw_kind(
      shared ? setup.shared_weights : setup.heldout_weights, rng);
  std::string last_error = "none";
  for (int attempt = 0; attempt < detail::kInstanceRetries; ++attempt) {
    const std::uint64_t world_seed = rng.next_u64();
    const std::uint64_t caption_seed = rng.next_u64();
    WorldModel world;
    try {
      world = sample_world(setup.world_spec, world_seed);
      const GeneratedCaption gc = setup.generator.generate_instance_caption(
          world, kind, target, caption_seed);
      if (gc.label != target)
        throw Error("internal: generated label disagrees with target");
      if (world.entities.size() <= oracle::kMaxOracleEntities &&
          oracle::brute_force_eval(gc.ast, world) != gc.label)
        throw Error("internal: oracle disagrees with evaluator");
      Instance inst;
      inst.id = instance_id(split, index);
      inst.split = split;
      inst.kind = kind;
      inst.label = gc.label;
      inst.caption = gc.text;
      inst.ast = gc.ast;
      inst.world = std::move(world);
      inst.image_ref = std::string("images/") + to_string(split) + "/" +
                       std::to_string(inst.id) + ".ppm";
      return inst;
    } catch (const NoValidCaption& e) {
      last_error = e.what();
    } catch (const NoValidCorruption& e) {
      last_error = e.what();
    } catch (const SamplingExhausted& e) {
      last_error = e.what();
    }
  }
  throw GenerationStalled(
      std::string("instance ") + std::to_string(index) + " of split " +
      to_string(split) + " failed after " +
      std::to_string(detail::kInstanceRetries) +
      " fresh worlds; last error: " + last_error);
}

struct GenerateOptions {
  int jobs = 1;
  bool write_images = true;
};

struct DatasetSummary {
  std::map<Split, std::int64_t> instances;
  std::map<Split, std::int64_t> true_labels;
  std::map<CaptionKind, std::int64_t> per_kind;
};

// End-to-end generation into `out_dir`: echoes the resolved config,
// writes one {split}.jsonl per non-empty split plus images/{split}/{id}.ppm.
// Output bytes depend only on the config, not on jobs or scheduling.
inline DatasetSummary generate_dataset(const DatasetConfig& config,
                                       const std::filesystem::path& out_dir,
                                       const GenerateOptions& options = {}) {
  if (auto errs = config.validation_errors(); !errs.empty())
    throw ConfigError("invalid config: " + errs.front());

  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  {
    std::ofstream out(out_dir / "config.json", std::ios::binary);
    out << config_to_json(config).dump(2) << "\n";
  }

  DatasetSummary summary;
  const int jobs = std::max(1, options.jobs);

  for (Split split : kAllSplits) {
    const std::int64_t count = config.count_for(split);
    if (count <= 0) continue;
    const auto setup = detail::split_setup(config, split);
    if (options.write_images)
      fs::create_directories(out_dir / "images" / to_string(split));

    std::vector<std::string> lines(static_cast<std::size_t>(count));
    std::vector<std::pair<Split, std::int64_t>> stats_kind;
    std::vector<std::exception_ptr> failures(static_cast<std::size_t>(jobs));
    std::vector<std::map<CaptionKind, std::int64_t>> kind_counts(
        static_cast<std::size_t>(jobs));
    std::vector<std::int64_t> true_counts(static_cast<std::size_t>(jobs), 0);

    auto worker = [&](int wi) {
      try {
        for (std::int64_t i = wi; i < count; i += jobs) {
          Instance inst = generate_instance(config, setup, split, i);
          if (options.write_images) {
            const Image img =
                rasterize(inst.world, config.image.width, config.image.height,
                          config.image.supersample);
            const auto bytes = encode_ppm(img);
            std::ofstream img_out(out_dir / inst.image_ref, std::ios::binary);
            img_out.write(reinterpret_cast<const char*>(bytes.data()),
                          static_cast<std::streamsize>(bytes.size()));
          }
          kind_counts[static_cast<std::size_t>(wi)][inst.kind] += 1;
          if (inst.label) true_counts[static_cast<std::size_t>(wi)] += 1;
          lines[static_cast<std::size_t>(i)] = serialize_instance(inst);
        }
      } catch (...) {
        failures[static_cast<std::size_t>(wi)] = std::current_exception();
      }
    };

    if (jobs == 1) {
      worker(0);
    } else {
      std::vector<std::thread> threads;
      threads.reserve(static_cast<std::size_t>(jobs));
      for (int wi = 0; wi < jobs; ++wi) threads.emplace_back(worker, wi);
      for (auto& t : threads) t.join();
    }
    for (const auto& f : failures)
      if (f) std::rethrow_exception(f);

    std::ofstream records(out_dir / (std::string(to_string(split)) + ".jsonl"),
                          std::ios::binary);
    for (const std::string& line : lines) records << line;

    summary.instances[split] = count;
    for (int wi = 0; wi < jobs; ++wi) {
      summary.true_labels[split] += true_counts[static_cast<std::size_t>(wi)];
      for (const auto& [k, n] : kind_counts[static_cast<std::size_t>(wi)])
        summary.per_kind[k] += n;
    }
  }
  return summary;
}

// --- loading & holdout audit -------------------------------------------------

inline std::vector<Instance> load_split_file(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MalformedRecord("cannot open " + path.string());
  std::vector<Instance> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(deserialize_instance(line));
  }
  return out;
}

inline std::vector<Instance> load_dataset(const std::filesystem::path& dir) {
  std::vector<Instance> out;
  bool any = false;
  for (Split s : kAllSplits) {
    const auto path = dir / (std::string(to_string(s)) + ".jsonl");
    if (!std::filesystem::exists(path)) continue;
    any = true;
    auto part = load_split_file(path);
    out.insert(out.end(), std::make_move_iterator(part.begin()),
               std::make_move_iterator(part.end()));
  }
  if (!any)
    throw MalformedRecord("no {split}.jsonl records found in " + dir.string());
  return out;
}

// Combinations mentioned inside the caption's noun phrases (both
// attributes present), including landmarks.
inline std::vector<ShapeColor> mentioned_combinations(const CaptionAst& ast) {
  std::vector<ShapeColor> out;
  auto from_restrictor = [&](const Restrictor& r) {
    if (r.shape && r.color) out.push_back({*r.shape, *r.color});
  };
  auto from_body = [&](const Body& b) {
    if (const auto* attr = std::get_if<AttributeBody>(&b)) {
      if (attr->shape && attr->color) out.push_back({*attr->shape, *attr->color});
    } else {
      from_restrictor(std::get<RelationBody>(b).landmark);
    }
  };
  auto from_clause = [&](const Clause& cl) {
    std::visit(
        [&](const auto& c) {
          using T = std::decay_t<decltype(c)>;
          if constexpr (std::is_same_v<T, Comparative>) {
            from_restrictor(c.restrictor_a);
            from_restrictor(c.restrictor_b);
          } else {
            from_restrictor(c.restrictor);
          }
          from_body(c.body);
        },
        cl);
  };
  from_clause(ast.head);
  if (ast.conjunct) from_clause(*ast.conjunct);
  return out;
}

struct HoldoutRow {
  Split split;
  ShapeColor combination;
  std::int64_t world_count = 0;
  std::int64_t caption_count = 0;
};

struct HoldoutReport {
  std::vector<HoldoutRow> rows;
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
};

// Verifies the compositional-split contract over serialized records:
// excluded combinations appear in no train/validation world or caption,
// and held-out caption kinds stay out of train/validation.
inline HoldoutReport check_holdout(const std::vector<Instance>& records,
                                   const SplitSpec& split_spec) {
  HoldoutReport report;
  for (Split split : kAllSplits)
    for (const auto& sc : split_spec.train_excluded_combinations)
      report.rows.push_back(HoldoutRow{split, sc});

  auto row_for = [&](Split split, const ShapeColor& sc) -> HoldoutRow* {
    for (auto& r : report.rows)
      if (r.split == split && r.combination == sc) return &r;
    return nullptr;
  };

  for (const Instance& inst : records) {
    const bool shifted_split = inst.split != Split::test;
    for (const auto& sc : split_spec.train_excluded_combinations) {
      HoldoutRow* row = row_for(inst.split, sc);
      for (const Entity& e : inst.world.entities)
        if (e.shape == sc.first && e.color == sc.second) {
          row->world_count += 1;
          if (shifted_split)
            report.violations.push_back(
                "record " + std::to_string(inst.id) + ": excluded " +
                std::string(to_string(sc.second)) + " " + to_string(sc.first) +
                " present in a " + to_string(inst.split) + " world");
          break;
        }
      for (const auto& mention : mentioned_combinations(inst.ast))
        if (mention == sc) {
          row->caption_count += 1;
          if (shifted_split)
            report.violations.push_back(
                "record " + std::to_string(inst.id) + ": excluded " +
                std::string(to_string(sc.second)) + " " + to_string(sc.first) +
                " mentioned in a " + to_string(inst.split) + " caption");
          break;
        }
    }
    if (inst.split != Split::test)
      for (CaptionKind k : split_spec.test_only_kinds)
        if (inst.kind == k)
          report.violations.push_back(
              "record " + std::to_string(inst.id) + ": test-only kind " +
              to_string(k) + " in split " + to_string(inst.split));
  }
  return report;
}

inline HoldoutReport check_holdout(const std::filesystem::path& dir,
                                   const SplitSpec& split_spec) {
  return check_holdout(load_dataset(dir), split_spec);
}

}  // namespace shapecap

#include "tact/trace.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <sstream>
#include <string_view>

namespace tact {

namespace {

constexpr std::string_view kOpenPerceive = "<perceive>";
constexpr std::string_view kClosePerceive = "</perceive>";
constexpr std::string_view kOpenCompare = "<compare>";
constexpr std::string_view kCloseCompare = "</compare>";
constexpr std::string_view kOpenConclude = "<conclude>";
constexpr std::string_view kCloseConclude = "</conclude>";

struct TagHits {
  int count = 0;
  std::size_t first = std::string::npos;
};

TagHits find_tag(std::string_view text, std::string_view tag) {
  TagHits hits;
  std::size_t pos = text.find(tag);
  while (pos != std::string_view::npos) {
    if (hits.count == 0) hits.first = pos;
    ++hits.count;
    pos = text.find(tag, pos + tag.size());
  }
  return hits;
}

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

bool whitespace_only(std::string_view text) {
  return std::all_of(text.begin(), text.end(), is_space);
}

std::string_view trim(std::string_view s) {
  std::size_t b = 0;
  while (b < s.size() && is_space(s[b])) ++b;
  std::size_t e = s.size();
  while (e > b && is_space(s[e - 1])) --e;
  return s.substr(b, e - b);
}

std::optional<int> parse_int(std::string_view token) {
  if (token.empty()) return std::nullopt;
  int value = 0;
  const char* begin = token.data();
  const char* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return value;
}

std::optional<int> parse_level(std::string_view token, int k_levels) {
  const auto v = parse_int(token);
  if (!v || *v < 0 || *v >= k_levels) return std::nullopt;
  return v;
}

// key=value tokens, space separated. Duplicated or malformed keys make the
// field unparsable; unknown keys are ignored.
TraceLine parse_line(std::string_view line, int k_levels) {
  TraceLine out;
  int n_sensor = 0, n_hard = 0, n_rough = 0, n_prot = 0, n_mat = 0;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && line[pos] == ' ') ++pos;
    std::size_t end = line.find(' ', pos);
    if (end == std::string_view::npos) end = line.size();
    const std::string_view token = line.substr(pos, end - pos);
    pos = end;
    if (token.empty()) continue;
    const std::size_t eq = token.find('=');
    if (eq == std::string_view::npos) continue;
    const std::string_view key = token.substr(0, eq);
    const std::string_view value = token.substr(eq + 1);
    if (key == "sensor") {
      out.sensor = sensor_from_string(value);
      ++n_sensor;
    } else if (key == "hardness") {
      out.hardness = parse_level(value, k_levels);
      ++n_hard;
    } else if (key == "roughness") {
      out.roughness = parse_level(value, k_levels);
      ++n_rough;
    } else if (key == "protrusion") {
      out.protrusion = parse_level(value, k_levels);
      ++n_prot;
    } else if (key == "material") {
      out.material = material_from_string(value);
      ++n_mat;
    }
  }
  if (n_sensor != 1) out.sensor.reset();
  if (n_hard != 1) out.hardness.reset();
  if (n_rough != 1) out.roughness.reset();
  if (n_prot != 1) out.protrusion.reset();
  if (n_mat != 1) out.material.reset();
  return out;
}

std::vector<std::string_view> nonempty_lines(std::string_view body) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos <= body.size()) {
    std::size_t nl = body.find('\n', pos);
    if (nl == std::string_view::npos) nl = body.size();
    const std::string_view line = trim(body.substr(pos, nl - pos));
    if (!line.empty()) lines.push_back(line);
    pos = nl + 1;
  }
  return lines;
}

// Body between an open/close pair when both appear exactly once, in order.
std::optional<std::string_view> segment_body(std::string_view text, std::string_view open,
                                             std::string_view close) {
  const TagHits o = find_tag(text, open);
  const TagHits c = find_tag(text, close);
  if (o.count != 1 || c.count != 1) return std::nullopt;
  const std::size_t begin = o.first + open.size();
  if (c.first < begin) return std::nullopt;
  return text.substr(begin, c.first - begin);
}

std::optional<std::vector<int>> parse_csv_ints(std::string_view raw) {
  std::vector<int> values;
  std::size_t pos = 0;
  while (true) {
    std::size_t comma = raw.find(',', pos);
    const std::string_view token =
        comma == std::string_view::npos ? raw.substr(pos) : raw.substr(pos, comma - pos);
    const auto v = parse_int(token);
    if (!v) return std::nullopt;
    values.push_back(*v);
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return values;
}

std::string line_text(const TraceLine& line, bool with_sensor) {
  std::ostringstream os;
  if (with_sensor) os << "sensor=" << to_string(*line.sensor) << ' ';
  os << "hardness=" << *line.hardness << " roughness=" << *line.roughness
     << " protrusion=" << *line.protrusion;
  if (line.material) os << " material=" << material_name(*line.material);
  return os.str();
}

}  // namespace

std::optional<int> TraceLine::ordinal(Attribute a) const {
  switch (a) {
    case Attribute::Hardness:
      return hardness;
    case Attribute::Roughness:
      return roughness;
    case Attribute::Protrusion:
      return protrusion;
    case Attribute::Material:
      return material;
  }
  return std::nullopt;
}

std::optional<int> ParsedTrace::perceive_value(SensorId s, Attribute a) const {
  const TraceLine* found = nullptr;
  for (const auto& line : perceive_lines) {
    if (line.sensor && *line.sensor == s) {
      if (found != nullptr) return std::nullopt;  // duplicated sensor line
      found = &line;
    }
  }
  if (found == nullptr) return std::nullopt;
  return found->ordinal(a);
}

bool tags_well_formed(const std::string& text) {
  const std::string_view sv = text;
  const TagHits op = find_tag(sv, kOpenPerceive);
  const TagHits cp = find_tag(sv, kClosePerceive);
  const TagHits oc = find_tag(sv, kOpenCompare);
  const TagHits cc = find_tag(sv, kCloseCompare);
  const TagHits ok = find_tag(sv, kOpenConclude);
  const TagHits ck = find_tag(sv, kCloseConclude);
  for (const TagHits* h : {&op, &cp, &oc, &cc, &ok, &ck}) {
    if (h->count != 1) return false;
  }
  if (!(op.first < cp.first && cp.first < oc.first && oc.first < cc.first &&
        cc.first < ok.first && ok.first < ck.first))
    return false;
  if (!whitespace_only(sv.substr(0, op.first))) return false;
  const std::size_t cp_end = cp.first + kClosePerceive.size();
  if (!whitespace_only(sv.substr(cp_end, oc.first - cp_end))) return false;
  const std::size_t cc_end = cc.first + kCloseCompare.size();
  if (!whitespace_only(sv.substr(cc_end, ok.first - cc_end))) return false;
  const std::size_t ck_end = ck.first + kCloseConclude.size();
  if (!whitespace_only(sv.substr(ck_end))) return false;
  return true;
}

ParsedTrace parse_trace(const std::string& text, int k_levels) {
  ParsedTrace out;
  const std::string_view sv = text;
  out.parse_ok = tags_well_formed(text);

  if (const auto body = segment_body(sv, kOpenPerceive, kClosePerceive)) {
    out.perceive_extracted = true;
    for (const auto line : nonempty_lines(*body)) {
      out.perceive_lines.push_back(parse_line(line, k_levels));
    }
  }
  if (const auto body = segment_body(sv, kOpenCompare, kCloseCompare)) {
    out.compare_extracted = true;
    const auto lines = nonempty_lines(*body);
    if (lines.size() == 1) out.compare_line = parse_line(lines[0], k_levels);
  }
  if (const auto body = segment_body(sv, kOpenConclude, kCloseConclude)) {
    out.conclude_extracted = true;
    const auto lines = nonempty_lines(*body);
    constexpr std::string_view kAnswerKey = "answer=";
    if (lines.size() == 1 && lines[0].substr(0, kAnswerKey.size()) == kAnswerKey) {
      out.conclude_raw = std::string(trim(lines[0].substr(kAnswerKey.size())));
    }
  }
  return out;
}

std::string answer_to_text(const Answer& answer) {
  std::ostringstream os;
  switch (answer.kind) {
    case Answer::Kind::Level:
      os << answer.level;
      break;
    case Answer::Kind::Material:
      os << material_name(answer.material);
      break;
    case Answer::Kind::Pair:
      os << (answer.pair_choice == 0 ? "first" : "second");
      break;
    case Answer::Kind::Perm:
      for (std::size_t i = 0; i < answer.perm.size(); ++i) {
        if (i > 0) os << ',';
        os << answer.perm[i];
      }
      break;
    case Answer::Kind::Tuple:
      os << answer.tuple[0] << ',' << answer.tuple[1] << ',' << answer.tuple[2];
      break;
  }
  return os.str();
}

std::string render_trace(const QAItem& item, const TraceSlots& slots) {
  (void)item;
  if (slots.template_id < 0 || slots.template_id >= kNumTemplates)
    throw std::invalid_argument("unknown template_id");

  std::ostringstream perceive;
  perceive << kOpenPerceive << '\n';
  for (const auto& line : slots.perceive) perceive << line_text(line, true) << '\n';
  perceive << kClosePerceive;

  std::ostringstream compare;
  compare << kOpenCompare << '\n' << line_text(slots.compare, false) << '\n' << kCloseCompare;
  std::ostringstream compare_unclosed;
  compare_unclosed << kOpenCompare << '\n' << line_text(slots.compare, false) << '\n';

  std::ostringstream conclude;
  conclude << kOpenConclude << '\n'
           << "answer=" << answer_to_text(slots.answer) << '\n'
           << kCloseConclude;

  std::ostringstream os;
  switch (slots.template_id) {
    case 0:
      os << perceive.str() << '\n' << compare.str() << '\n' << conclude.str() << '\n';
      break;
    case 1:  // missing closing tag
      os << perceive.str() << '\n' << compare_unclosed.str() << conclude.str() << '\n';
      break;
    case 2:  // duplicated perceive block
      os << perceive.str() << '\n'
         << perceive.str() << '\n'
         << compare.str() << '\n'
         << conclude.str() << '\n';
      break;
    case 3:  // segments out of order
      os << compare.str() << '\n' << perceive.str() << '\n' << conclude.str() << '\n';
      break;
    case 4:  // non-whitespace text outside the segments
      os << "unverified reading\n"
         << perceive.str() << '\n'
         << compare.str() << '\n'
         << conclude.str() << '\n';
      break;
    default:
      throw std::invalid_argument("unknown template_id");
  }
  return os.str();
}

std::optional<Answer> extract_answer(const ParsedTrace& parsed, const QAItem& item,
                                     int k_levels) {
  if (!parsed.conclude_raw) return std::nullopt;
  const std::string_view raw = *parsed.conclude_raw;
  switch (item.tier) {
    case Tier::Property:
    case Tier::CrossSensor:
    case Tier::Conflict: {
      if (item.attribute == Attribute::Material) {
        const auto m = material_from_string(raw);
        if (!m) return std::nullopt;
        return Answer::make_material(*m);
      }
      const auto level = parse_level(raw, k_levels);
      if (!level) return std::nullopt;
      return Answer::make_level(*level);
    }
    case Tier::OrdinalCompositional: {
      const auto values = parse_csv_ints(raw);
      if (!values || values->size() != 3) return std::nullopt;
      for (int v : *values) {
        if (v < 0 || v >= k_levels) return std::nullopt;
      }
      return Answer::make_tuple((*values)[0], (*values)[1], (*values)[2]);
    }
    case Tier::ComparativePairwise: {
      if (raw == "first") return Answer::make_pair(0);
      if (raw == "second") return Answer::make_pair(1);
      return std::nullopt;
    }
    case Tier::ComparativeListwise: {
      const auto values = parse_csv_ints(raw);
      const int n = static_cast<int>(item.objects.size());
      if (!values || static_cast<int>(values->size()) != n) return std::nullopt;
      std::vector<bool> seen(static_cast<std::size_t>(n), false);
      for (int v : *values) {
        if (v < 0 || v >= n || seen[static_cast<std::size_t>(v)]) return std::nullopt;
        seen[static_cast<std::size_t>(v)] = true;
      }
      return Answer::make_perm(*values);
    }
  }
  return std::nullopt;
}

}  // namespace tact

#include "cafem/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <vector>

#include "cafem/errors.hpp"

namespace cafem {

namespace {

enum class Kind { Number, Integer, Boolean, Text, Shape, NumberList };

struct Key {
  const char* path;
  Kind kind;
  // Required keys must appear in every file; conditional keys are checked separately.
  bool required;
  std::function<double&(ScenarioConfig&)> number;
  std::function<std::string&(ScenarioConfig&)> text;
  std::function<bool&(ScenarioConfig&)> flag;
};

Key num(const char* path, bool required, std::function<double&(ScenarioConfig&)> f) {
  return {path, Kind::Number, required, std::move(f), {}, {}};
}
Key flag(const char* path, bool required, std::function<bool&(ScenarioConfig&)> f) {
  return {path, Kind::Boolean, required, {}, {}, std::move(f)};
}
Key text(const char* path, bool required, std::function<std::string&(ScenarioConfig&)> f) {
  return {path, Kind::Text, required, {}, std::move(f), {}};
}
Key special(const char* path, Kind kind, bool required) { return {path, kind, required, {}, {}, {}}; }

const std::vector<Key>& keys() {
  static const std::vector<Key> table = {
      text("scenario.name", false, [](ScenarioConfig& c) -> std::string& { return c.name; }),

      num("geometry.r_inner", true, [](ScenarioConfig& c) -> double& { return c.r_inner; }),
      num("geometry.r_outer", true, [](ScenarioConfig& c) -> double& { return c.r_outer; }),
      num("geometry.h", true, [](ScenarioConfig& c) -> double& { return c.h; }),

      num("diffusion.cytosol", true, [](ScenarioConfig& c) -> double& { return c.diffusion.cytosol; }),
      num("diffusion.buffer", false, [](ScenarioConfig& c) -> double& { return c.diffusion.buffer; }),
      num("diffusion.er", true, [](ScenarioConfig& c) -> double& { return c.diffusion.er; }),

      num("er_membrane.c1e", true, [](ScenarioConfig& c) -> double& { return c.flux.c1e; }),
      num("er_membrane.c2e", true, [](ScenarioConfig& c) -> double& { return c.flux.c2e; }),
      num("er_membrane.c3e", true, [](ScenarioConfig& c) -> double& { return c.flux.c3e; }),
      num("er_membrane.ks", true, [](ScenarioConfig& c) -> double& { return c.flux.ks; }),
      num("er_membrane.m", false, [](ScenarioConfig& c) -> double& { return c.flux.m; }),

      num("plasma_membrane.c1", true, [](ScenarioConfig& c) -> double& { return c.flux.c1c; }),
      num("plasma_membrane.c2", true, [](ScenarioConfig& c) -> double& { return c.flux.c2c; }),
      num("plasma_membrane.c3", true, [](ScenarioConfig& c) -> double& { return c.flux.c3c; }),
      num("plasma_membrane.kp", true, [](ScenarioConfig& c) -> double& { return c.flux.kp; }),
      num("plasma_membrane.kn", true, [](ScenarioConfig& c) -> double& { return c.flux.kn; }),
      num("plasma_membrane.c_out", true, [](ScenarioConfig& c) -> double& { return c.flux.c_out; }),

      flag("buffer.enabled", false, [](ScenarioConfig& c) -> bool& { return c.buffer; }),
      num("buffer.b0", false, [](ScenarioConfig& c) -> double& { return c.flux.b0; }),
      num("buffer.kb_minus", false, [](ScenarioConfig& c) -> double& { return c.flux.kb_minus; }),
      num("buffer.kb_plus", false, [](ScenarioConfig& c) -> double& { return c.flux.kb_plus; }),
      num("buffer.initial", false, [](ScenarioConfig& c) -> double& { return c.b_init; }),

      num("gating.ka_plus", false, [](ScenarioConfig& c) -> double& { return c.rates.ka_plus; }),
      num("gating.ka_minus", false, [](ScenarioConfig& c) -> double& { return c.rates.ka_minus; }),
      num("gating.kb_plus", false, [](ScenarioConfig& c) -> double& { return c.rates.kb_plus; }),
      num("gating.kb_minus", false, [](ScenarioConfig& c) -> double& { return c.rates.kb_minus; }),
      num("gating.kc_plus", false, [](ScenarioConfig& c) -> double& { return c.rates.kc_plus; }),
      num("gating.kc_minus", false, [](ScenarioConfig& c) -> double& { return c.rates.kc_minus; }),
      num("gating.c1", true, [](ScenarioConfig& c) -> double& { return c.gating0.c1; }),
      num("gating.o", true, [](ScenarioConfig& c) -> double& { return c.gating0.o; }),
      num("gating.c2", true, [](ScenarioConfig& c) -> double& { return c.gating0.c2; }),

      num("initial.u", true, [](ScenarioConfig& c) -> double& { return c.u0; }),
      num("initial.ue", true, [](ScenarioConfig& c) -> double& { return c.ue0; }),

      special("influx.shape", Kind::Shape, false),
      num("influx.amplitude", false, [](ScenarioConfig& c) -> double& { return c.influx.amplitude; }),
      num("influx.t_start", false, [](ScenarioConfig& c) -> double& { return c.influx.t_start; }),
      num("influx.t_end", false, [](ScenarioConfig& c) -> double& { return c.influx.t_end; }),
      num("influx.region_offset", false, [](ScenarioConfig& c) -> double& { return c.influx.region_offset; }),

      flag("clamp.enabled", false, [](ScenarioConfig& c) -> bool& { return c.clamp.enabled; }),
      num("clamp.a", false, [](ScenarioConfig& c) -> double& { return c.clamp.a; }),
      num("clamp.upper", false, [](ScenarioConfig& c) -> double& { return c.clamp.upper; }),

      num("numerics.dt", true, [](ScenarioConfig& c) -> double& { return c.dt; }),
      num("numerics.final_time", true, [](ScenarioConfig& c) -> double& { return c.final_time; }),
      flag("numerics.deterministic", false, [](ScenarioConfig& c) -> bool& { return c.deterministic; }),

      text("output.directory", false, [](ScenarioConfig& c) -> std::string& { return c.output_dir; }),
      special("output.series_interval", Kind::Integer, false),
      special("output.snapshots", Kind::NumberList, false),
  };
  return table;
}

const char* shape_name(InfluxPulse::Shape s) {
  switch (s) {
    case InfluxPulse::Shape::Rectangular: return "rectangular";
    case InfluxPulse::Shape::SmoothBump: return "smooth_bump";
    default: return "none";
  }
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

bool parse_double(const std::string& s, double& out) {
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && p == end;
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

ScenarioConfig parse_config(std::istream& in) {
  ScenarioConfig c;
  c.snapshot_times.clear();
  std::map<std::string, std::size_t> seen;  // key path -> line
  std::map<std::string, std::size_t> sections;
  std::string section, raw;
  std::size_t line = 0;

  auto find_key = [](const std::string& path) -> const Key* {
    for (const auto& k : keys())
      if (path == k.path) return &k;
    return nullptr;
  };

  while (std::getline(in, raw)) {
    ++line;
    std::string_view view(raw);
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    const std::string s = trim(view);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ParseError(line, "malformed section header '" + s + "'");
      section = trim(std::string_view(s).substr(1, s.size() - 2));
      bool known = false;
      for (const auto& k : keys()) known = known || std::string(k.path).starts_with(section + ".");
      if (!known) throw ParseError(line, "unknown section [" + section + "]");
      if (sections.count(section)) throw ParseError(line, "duplicate section [" + section + "]");
      sections[section] = line;
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ParseError(line, "expected 'key = value', got '" + s + "'");
    if (section.empty()) throw ParseError(line, "key outside of any section");
    const std::string name = trim(std::string_view(s).substr(0, eq));
    const std::string value = trim(std::string_view(s).substr(eq + 1));
    const std::string path = section + "." + name;
    const Key* key = find_key(path);
    if (!key) throw ParseError(line, "unknown key '" + path + "'");
    if (seen.count(path)) throw ParseError(line, "duplicate key '" + path + "'");
    seen[path] = line;

    auto mismatch = [&](const char* expected) {
      return ParseError(line, path + ": expected " + expected + ", got '" + value + "'");
    };
    switch (key->kind) {
      case Kind::Number:
        if (!parse_double(value, key->number(c))) throw mismatch("a number");
        break;
      case Kind::Boolean:
        if (value == "true")
          key->flag(c) = true;
        else if (value == "false")
          key->flag(c) = false;
        else
          throw mismatch("true or false");
        break;
      case Kind::Text:
        if (value.empty()) throw mismatch("a non-empty string");
        key->text(c) = value;
        break;
      case Kind::Shape:
        if (value == "none")
          c.influx.shape = InfluxPulse::Shape::None;
        else if (value == "rectangular")
          c.influx.shape = InfluxPulse::Shape::Rectangular;
        else if (value == "smooth_bump")
          c.influx.shape = InfluxPulse::Shape::SmoothBump;
        else
          throw mismatch("none, rectangular or smooth_bump");
        break;
      case Kind::Integer: {
        long v = 0;
        auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
        if (ec != std::errc() || p != value.data() + value.size()) throw mismatch("an integer");
        c.series_interval = v;
        break;
      }
      case Kind::NumberList: {
        std::stringstream items(value);
        std::string item;
        while (std::getline(items, item, ',')) {
          double t = 0.0;
          if (!parse_double(trim(item), t)) throw mismatch("a comma-separated list of numbers");
          c.snapshot_times.push_back(t);
        }
        break;
      }
    }
  }

  auto require = [&](const std::string& path) {
    if (seen.count(path)) return;
    const auto dot = path.find('.');
    const auto sec = sections.find(path.substr(0, dot));
    throw ParseError(sec != sections.end() ? sec->second : line, "missing required key '" + path + "'");
  };
  for (const auto& k : keys())
    if (k.required) require(k.path);
  if (c.buffer)
    for (const char* p : {"diffusion.buffer", "buffer.b0", "buffer.kb_minus", "buffer.kb_plus", "buffer.initial"})
      require(p);
  if (c.influx.shape != InfluxPulse::Shape::None)
    for (const char* p : {"influx.amplitude", "influx.t_start", "influx.t_end"}) require(p);

  try {
    c.validate();
  } catch (const ConfigError& e) {
    const auto it = seen.find(e.key());
    throw ParseError(it != seen.end() ? it->second : line, e.what());
  }
  return c;
}

ScenarioConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file " + path.string());
  try {
    return parse_config(in);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), path.string() + ": " + e.what());
  }
}

void write_config(const ScenarioConfig& config, std::ostream& out) {
  ScenarioConfig c = config;
  std::string section;
  for (const auto& k : keys()) {
    const std::string path = k.path;
    const auto dot = path.find('.');
    if (path.substr(0, dot) != section) {
      if (!section.empty()) out << '\n';
      section = path.substr(0, dot);
      out << '[' << section << "]\n";
    }
    out << path.substr(dot + 1) << " = ";
    switch (k.kind) {
      case Kind::Number: out << format_number(k.number(c)); break;
      case Kind::Boolean: out << (k.flag(c) ? "true" : "false"); break;
      case Kind::Text: out << k.text(c); break;
      case Kind::Shape: out << shape_name(c.influx.shape); break;
      case Kind::Integer: out << c.series_interval; break;
      case Kind::NumberList:
        for (std::size_t i = 0; i < c.snapshot_times.size(); ++i)
          out << (i ? ", " : "") << format_number(c.snapshot_times[i]);
        break;
    }
    out << '\n';
  }
}

void write_config(const ScenarioConfig& config, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write config file " + path.string());
  write_config(config, out);
  if (!out) throw Error("failed writing config file " + path.string());
}

}  // namespace cafem

#include "ilcfr_cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "ilcfr/error.hpp"

namespace ilcfr::cli {
namespace pt = boost::property_tree;

BlockRect BlockSpec::resolve(Index rows, Index cols) const {
  switch (anchor) {
    case Anchor::upper_left: return {0, height, 0, width};
    case Anchor::upper_right: return {0, height, cols - width, cols};
    case Anchor::lower_left: return {rows - height, rows, 0, width};
    case Anchor::lower_right: return {rows - height, rows, cols - width, cols};
    case Anchor::explicit_rect: return rect;
  }
  return rect;
}

std::string BlockSpec::to_string() const {
  switch (anchor) {
    case Anchor::upper_left: return fmt::format("upper_left {}x{}", height, width);
    case Anchor::upper_right: return fmt::format("upper_right {}x{}", height, width);
    case Anchor::lower_left: return fmt::format("lower_left {}x{}", height, width);
    case Anchor::lower_right: return fmt::format("lower_right {}x{}", height, width);
    case Anchor::explicit_rect:
      return fmt::format("rect {} {} {} {}", rect.row_begin, rect.row_end, rect.col_begin,
                         rect.col_end);
  }
  return {};
}

namespace {

std::string trim(std::string s) {
  const auto ws = " \t\r\n";
  s.erase(0, s.find_first_not_of(ws));
  s.erase(s.find_last_not_of(ws) + 1);
  return s;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

class Field {
 public:
  Field(const std::string& source, const std::string& section, const std::string& key,
        std::string value)
      : where_(fmt::format("{}: [{}] {}", source, section, key)), value_(trim(std::move(value))) {}

  [[noreturn]] void bad(const std::string& why) const {
    fail(ErrorCode::config_error, fmt::format("{} = '{}': {}", where_, value_, why));
  }

  const std::string& text() const { return value_; }

  double real() const {
    double v = 0.0;
    const auto* end = value_.data() + value_.size();
    auto [ptr, ec] = std::from_chars(value_.data(), end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v)) bad("expected a finite number");
    return v;
  }

  long long integer() const {
    long long v = 0;
    const auto* end = value_.data() + value_.size();
    auto [ptr, ec] = std::from_chars(value_.data(), end, v);
    if (ec != std::errc() || ptr != end) bad("expected an integer");
    return v;
  }

  double positive() const {
    const double v = real();
    if (!(v > 0.0)) bad("must be > 0");
    return v;
  }

  long long at_least(long long lo) const {
    const long long v = integer();
    if (v < lo) bad(fmt::format("must be >= {}", lo));
    return v;
  }

  bool boolean() const {
    if (value_ == "true" || value_ == "yes" || value_ == "1") return true;
    if (value_ == "false" || value_ == "no" || value_ == "0") return false;
    bad("expected true/false");
  }

  std::optional<Index> auto_or_index(long long lo) const {
    if (value_ == "auto") return std::nullopt;
    return static_cast<Index>(at_least(lo));
  }

 private:
  std::string where_;
  std::string value_;
};

std::vector<BlockSpec> parse_blocks(const Field& f) {
  std::vector<BlockSpec> out;
  for (const std::string& item : split(f.text(), ',')) {
    std::stringstream ss(item);
    std::string anchor;
    ss >> anchor;
    BlockSpec b;
    if (anchor == "rect") {
      long long r0, r1, c0, c1;
      if (!(ss >> r0 >> r1 >> c0 >> c1) || r0 < 0 || c0 < 0 || r1 <= r0 || c1 <= c0)
        f.bad("rect needs 'rect row_begin row_end col_begin col_end' (half-open, 0-based)");
      b.anchor = BlockSpec::Anchor::explicit_rect;
      b.rect = {r0, r1, c0, c1};
    } else {
      if (anchor == "upper_left") b.anchor = BlockSpec::Anchor::upper_left;
      else if (anchor == "upper_right") b.anchor = BlockSpec::Anchor::upper_right;
      else if (anchor == "lower_left") b.anchor = BlockSpec::Anchor::lower_left;
      else if (anchor == "lower_right") b.anchor = BlockSpec::Anchor::lower_right;
      else f.bad("unknown block anchor '" + anchor + "'");
      std::string size;
      ss >> size;
      const auto x = size.find('x');
      long long h = 0, w = 0;
      try {
        if (x == std::string::npos) throw std::invalid_argument("no x");
        h = std::stoll(size.substr(0, x));
        w = std::stoll(size.substr(x + 1));
      } catch (const std::exception&) {
        f.bad("block size must look like '5x5'");
      }
      if (h < 1 || w < 1) f.bad("block size must be positive");
      b.height = h;
      b.width = w;
    }
    std::string rest;
    if (ss >> rest) f.bad("trailing text in block '" + item + "'");
    out.push_back(b);
  }
  if (out.empty()) f.bad("empty block list");
  return out;
}

using Handler = void (*)(ExperimentConfig&, const Field&);

struct KeyTable {
  std::map<std::string, Handler> keys;
};

const std::map<std::string, KeyTable>& schema() {
  static const std::map<std::string, KeyTable> table = {
      {"experiment",
       {{{"name", [](ExperimentConfig& c, const Field& f) { c.name = f.text(); }}}}},
      {"plant",
       {{{"a", [](ExperimentConfig& c, const Field& f) { c.plant.params.a = f.positive(); }},
         {"omega0",
          [](ExperimentConfig& c, const Field& f) { c.plant.params.omega0 = f.positive(); }},
         {"xi", [](ExperimentConfig& c, const Field& f) { c.plant.params.xi = f.positive(); }},
         {"sample_rate",
          [](ExperimentConfig& c, const Field& f) { c.plant.sample_rate = f.positive(); }},
         {"N", [](ExperimentConfig& c, const Field& f) { c.plant.N = f.at_least(1); }},
         {"skip", [](ExperimentConfig& c, const Field& f) { c.plant.skip = f.at_least(0); }}}}},
      {"law",
       {{{"approaches",
          [](ExperimentConfig& c, const Field& f) {
            c.law.approaches.clear();
            for (const std::string& s : split(f.text(), ',')) {
              auto v = parse_law_variant(s);
              if (!v) f.bad("unknown approach '" + s + "'");
              if (std::find(c.law.approaches.begin(), c.law.approaches.end(), *v) ==
                  c.law.approaches.end())
                c.law.approaches.push_back(*v);
            }
            if (c.law.approaches.empty()) f.bad("no approaches listed");
          }},
         {"extended_factor",
          [](ExperimentConfig& c, const Field& f) { c.law.extended_factor = f.at_least(1); }},
         {"reduce", [](ExperimentConfig& c, const Field& f) { c.law.reduce = f.boolean(); }}}}},
      {"fir",
       {{{"m", [](ExperimentConfig& c, const Field& f) { c.fir.m = f.auto_or_index(1); }},
         {"n", [](ExperimentConfig& c, const Field& f) { c.fir.n = f.auto_or_index(1); }},
         {"grid_first_deg",
          [](ExperimentConfig& c, const Field& f) {
            c.fir.grid_first_deg = static_cast<int>(f.at_least(0));
          }},
         {"grid_last_deg",
          [](ExperimentConfig& c, const Field& f) {
            const long long v = f.at_least(0);
            if (v > 180) f.bad("must be <= 180");
            c.fir.grid_last_deg = static_cast<int>(v);
          }}}}},
      {"tune",
       {{{"target",
          [](ExperimentConfig& c, const Field& f) {
            const double v = f.real();
            if (!(v > 0.0 && v < 1.0)) f.bad("must lie in (0, 1)");
            c.tune.target = v;
          }},
         {"rule",
          [](ExperimentConfig& c, const Field& f) {
            auto r = parse_step_rule(f.text());
            if (!r) f.bad("expected line_search, backtracking or polyak");
            c.tune.rule = *r;
          }},
         {"max_iters",
          [](ExperimentConfig& c, const Field& f) {
            c.tune.max_iters = static_cast<int>(f.at_least(0));
          }},
         {"step_init",
          [](ExperimentConfig& c, const Field& f) { c.tune.step_init = f.positive(); }},
         {"shrink",
          [](ExperimentConfig& c, const Field& f) {
            const double v = f.real();
            if (!(v > 0.0 && v < 1.0)) f.bad("must lie in (0, 1)");
            c.tune.shrink = v;
          }},
         {"grad_tol",
          [](ExperimentConfig& c, const Field& f) { c.tune.grad_tol = f.positive(); }},
         {"landing_tol",
          [](ExperimentConfig& c, const Field& f) { c.tune.landing_tol = f.positive(); }},
         {"seed",
          [](ExperimentConfig& c, const Field& f) {
            c.tune.seed = static_cast<std::uint64_t>(f.at_least(0));
          }},
         {"blocks_fir_banded",
          [](ExperimentConfig& c, const Field& f) {
            c.tune.blocks[LawVariant::fir_banded] = parse_blocks(f);
          }},
         {"blocks_fir_full",
          [](ExperimentConfig& c, const Field& f) {
            c.tune.blocks[LawVariant::fir_full] = parse_blocks(f);
          }},
         {"blocks_circulant",
          [](ExperimentConfig& c, const Field& f) {
            c.tune.blocks[LawVariant::circulant] = parse_blocks(f);
          }},
         {"blocks_circulant_extended",
          [](ExperimentConfig& c, const Field& f) {
            c.tune.blocks[LawVariant::circulant_extended] = parse_blocks(f);
          }}}}},
      {"trajectory",
       {{{"kind",
          [](ExperimentConfig& c, const Field& f) {
            if (f.text() != "quintic" && f.text() != "raised_cos_sq" && f.text() != "sine")
              f.bad("expected quintic, raised_cos_sq or sine");
            c.trajectory.kind = f.text();
          }},
         {"omega",
          [](ExperimentConfig& c, const Field& f) { c.trajectory.omega = f.positive(); }},
         {"u0",
          [](ExperimentConfig& c, const Field& f) {
            if (f.text() == "desired") c.trajectory.u0 = InitialInput::desired;
            else if (f.text() == "zero") c.trajectory.u0 = InitialInput::zero;
            else f.bad("expected desired or zero");
          }},
         {"iterations",
          [](ExperimentConfig& c, const Field& f) {
            c.trajectory.iterations = static_cast<int>(f.at_least(0));
          }},
         {"wiggle_window",
          [](ExperimentConfig& c, const Field& f) {
            c.trajectory.wiggle_window = f.at_least(1);
          }}}}},
      {"sweep",
       {{{"params",
          [](ExperimentConfig& c, const Field& f) {
            c.sweep.params.clear();
            for (const std::string& s : split(f.text(), ',')) {
              auto p = parse_plant_parameter(s);
              if (!p) f.bad("unknown parameter '" + s + "' (a, omega0, xi)");
              c.sweep.params.push_back(*p);
            }
            if (c.sweep.params.empty()) f.bad("no parameters listed");
          }},
         {"first", [](ExperimentConfig& c, const Field& f) { c.sweep.first = f.positive(); }},
         {"last", [](ExperimentConfig& c, const Field& f) { c.sweep.last = f.positive(); }},
         {"step", [](ExperimentConfig& c, const Field& f) { c.sweep.step = f.positive(); }},
         {"resolution",
          [](ExperimentConfig& c, const Field& f) { c.sweep.resolution = f.positive(); }}}}},
      {"deviation",
       {{{"samples",
          [](ExperimentConfig& c, const Field& f) { c.deviation.samples = f.at_least(1); }},
         {"factor",
          [](ExperimentConfig& c, const Field& f) { c.deviation.factor = f.at_least(1); }},
         {"omega_min",
          [](ExperimentConfig& c, const Field& f) {
            const double v = f.real();
            if (v < 0.0) f.bad("must be >= 0");
            c.deviation.omega_min = v;
          }},
         {"omega_max",
          [](ExperimentConfig& c, const Field& f) { c.deviation.omega_max = f.positive(); }},
         {"points", [](ExperimentConfig& c, const Field& f) {
            c.deviation.points = static_cast<int>(f.at_least(1));
          }}}}},
  };
  return table;
}

void validate(const ExperimentConfig& c, const std::string& source) {
  auto bad = [&](const std::string& why) {
    fail(ErrorCode::config_error, fmt::format("{}: {}", source, why));
  };
  if (c.plant.skip >= c.plant.N)
    bad(fmt::format("N={} with skip={} leaves a 0x0 iteration matrix", c.plant.N,
                    c.plant.skip));
  const Index n = c.fir.n.value_or(c.plant.N);
  if (c.fir.m && *c.fir.m > n) bad(fmt::format("[fir] m={} exceeds n={}", *c.fir.m, n));
  if (c.fir.grid_first_deg > c.fir.grid_last_deg)
    bad("[fir] grid_first_deg exceeds grid_last_deg");
  if (c.tune.enabled) {
    for (LawVariant v : c.law.approaches)
      if (!c.tune.blocks.count(v))
        bad(fmt::format("[tune] has no blocks_{} for a listed approach", to_string(v)));
  }
  if (c.trajectory.enabled && c.trajectory.kind != "quintic" && !(c.trajectory.omega > 0.0))
    bad("[trajectory] " + c.trajectory.kind + " needs omega");
  if (c.sweep.enabled) {
    if (c.sweep.last < c.sweep.first) bad("[sweep] last < first");
    if (c.sweep.first < 1.0 || c.sweep.last > 300.0)
      bad("[sweep] grid must stay within [1, 300] percent of nominal");
  }
  if (c.deviation.enabled && c.deviation.omega_max > 0.0 &&
      c.deviation.omega_max <= c.deviation.omega_min)
    bad("[deviation] omega_max must exceed omega_min");
}

}  // namespace

ExperimentConfig parse_config(std::istream& in, const std::string& source) {
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  ExperimentConfig cfg;
  const auto& table = schema();

  // Empty sections never reach the tree, so headers are checked on the raw text.
  {
    std::istringstream lines(text);
    std::string line;
    for (int no = 1; std::getline(lines, line); ++no) {
      const std::string t = trim(line);
      if (t.size() < 2 || t.front() != '[' || t.back() != ']') continue;
      const std::string section = trim(t.substr(1, t.size() - 2));
      if (!table.contains(section))
        fail(ErrorCode::config_error,
             fmt::format("{}:{}: unknown section [{}]", source, no, section));
      if (section == "tune") cfg.tune.enabled = true;
      if (section == "trajectory") cfg.trajectory.enabled = true;
      if (section == "sweep") cfg.sweep.enabled = true;
      if (section == "deviation") cfg.deviation.enabled = true;
    }
  }

  pt::ptree tree;
  try {
    std::istringstream body(text);
    pt::ini_parser::read_ini(body, tree);
  } catch (const pt::ini_parser_error& e) {
    fail(ErrorCode::config_error,
         fmt::format("{}:{}: {}", source, e.line(), e.message()));
  }

  for (const auto& [section, body] : tree) {
    if (!body.data().empty())
      fail(ErrorCode::config_error,
           fmt::format("{}: key '{}' outside of any [section]", source, section));
    auto st = table.find(section);
    if (st == table.end())
      fail(ErrorCode::config_error, fmt::format("{}: unknown section [{}]", source, section));
    for (const auto& [key, value] : body) {
      auto h = st->second.keys.find(key);
      if (h == st->second.keys.end())
        fail(ErrorCode::config_error,
             fmt::format("{}: unknown key '{}' in [{}]", source, key, section));
      h->second(cfg, Field(source, section, key, value.data()));
    }
  }
  validate(cfg, source);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::config_error, "cannot open config " + path.string());
  return parse_config(in, path.string());
}

std::string render_config(const ExperimentConfig& c) {
  auto num = [](double v) { return fmt::format("{:.17g}", v); };
  std::string out;
  out += fmt::format("[experiment]\nname = {}\n\n", c.name);
  out += fmt::format("[plant]\na = {}\nomega0 = {}\nxi = {}\nsample_rate = {}\nN = {}\nskip = {}\n\n",
                     num(c.plant.params.a), num(c.plant.params.omega0), num(c.plant.params.xi),
                     num(c.plant.sample_rate), c.plant.N, c.plant.skip);
  std::vector<std::string> names;
  for (LawVariant v : c.law.approaches) names.emplace_back(to_string(v));
  out += fmt::format("[law]\napproaches = {}\nextended_factor = {}\nreduce = {}\n\n",
                     fmt::join(names, ", "), c.law.extended_factor, c.law.reduce);
  out += fmt::format("[fir]\nm = {}\nn = {}\ngrid_first_deg = {}\ngrid_last_deg = {}\n\n",
                     c.fir.m ? std::to_string(*c.fir.m) : "auto",
                     c.fir.n ? std::to_string(*c.fir.n) : "auto", c.fir.grid_first_deg,
                     c.fir.grid_last_deg);
  if (c.tune.enabled) {
    out += fmt::format(
        "[tune]\ntarget = {}\nrule = {}\nmax_iters = {}\nstep_init = {}\nshrink = {}\n"
        "grad_tol = {}\nlanding_tol = {}\nseed = {}\n",
        num(c.tune.target), to_string(c.tune.rule), c.tune.max_iters, num(c.tune.step_init),
        num(c.tune.shrink), num(c.tune.grad_tol), num(c.tune.landing_tol), c.tune.seed);
    for (const auto& [v, blocks] : c.tune.blocks) {
      std::vector<std::string> items;
      for (const BlockSpec& b : blocks) items.push_back(b.to_string());
      out += fmt::format("blocks_{} = {}\n", to_string(v), fmt::join(items, ", "));
    }
    out += "\n";
  }
  if (c.trajectory.enabled)
    out += fmt::format(
        "[trajectory]\nkind = {}\n{}u0 = {}\niterations = {}\nwiggle_window = {}\n\n",
        c.trajectory.kind,
        c.trajectory.omega > 0.0 ? fmt::format("omega = {}\n", num(c.trajectory.omega)) : "",
        c.trajectory.u0 == InitialInput::desired ? "desired" : "zero", c.trajectory.iterations,
        c.trajectory.wiggle_window);
  if (c.sweep.enabled) {
    std::vector<std::string> ps;
    for (PlantParameter p : c.sweep.params) ps.emplace_back(to_string(p));
    out += fmt::format("[sweep]\nparams = {}\nfirst = {}\nlast = {}\nstep = {}\nresolution = {}\n\n",
                       fmt::join(ps, ", "), num(c.sweep.first), num(c.sweep.last),
                       num(c.sweep.step), num(c.sweep.resolution));
  }
  if (c.deviation.enabled)
    out += fmt::format(
        "[deviation]\nsamples = {}\nfactor = {}\nomega_min = {}\n{}points = {}\n\n",
        c.deviation.samples, c.deviation.factor, num(c.deviation.omega_min),
        c.deviation.omega_max > 0.0 ? fmt::format("omega_max = {}\n", num(c.deviation.omega_max))
                                    : "",
        c.deviation.points);
  return out;
}

}  // namespace ilcfr::cli

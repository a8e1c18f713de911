#include "kernbound/cli.hpp"

#include <charconv>
#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "kernbound/bounds.hpp"
#include "kernbound/errors.hpp"
#include "kernbound/io.hpp"
#include "kernbound/kernel.hpp"
#include "kernbound/learner.hpp"
#include "kernbound/parallel.hpp"
#include "kernbound/proof_checks.hpp"
#include "kernbound/rademacher.hpp"
#include "kernbound/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace kernbound {
namespace {

std::string trim(std::string s) {
  const auto* ws = " \t\r\n";
  const auto begin = s.find_first_not_of(ws);
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(ws);
  return s.substr(begin, end - begin + 1);
}

// Flat dotted-key configuration merged from a file and flag overrides. Every
// key must be consumed by the running command (or belong to a section that
// command does not read); leftovers are reported with their source line.
class Config {
 public:
  static Config load(const std::string& path) {
    Config cfg;
    cfg.path_ = path;
    std::ifstream in(path);
    if (!in) throw ParamError("cannot open config " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const std::string text = trim(line);
      if (text.empty()) continue;
      const auto eq = text.find('=');
      if (eq == std::string::npos)
        throw ParamError(cfg.where(lineno) + ": expected 'key = value'");
      const std::string key = trim(text.substr(0, eq));
      const std::string value = trim(text.substr(eq + 1));
      if (key.empty()) throw ParamError(cfg.where(lineno) + ": empty key");
      if (key.find_first_not_of(
              "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789._") !=
          std::string::npos)
        throw ParamError(cfg.where(lineno) + ": invalid key '" + key + "'");
      const auto existing = entries_find(cfg, key);
      if (existing)
        throw ParamError(cfg.where(lineno) + ": duplicate key '" + key +
                         "' (first set at line " + std::to_string(*existing) + ")");
      cfg.entries_[key] = Entry{value, lineno, false};
    }
    return cfg;
  }

  void override_value(const std::string& key, const std::string& value) {
    entries_[key] = Entry{value, 0, false};
  }

  bool has(const std::string& key) const { return entries_.count(key) > 0; }

  std::optional<std::string> take(const std::string& key) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    it->second.consumed = true;
    return it->second.value;
  }

  std::string take_required(const std::string& key, const std::string& why) {
    auto v = take(key);
    if (!v) throw ParamError("config: '" + key + "' is required " + why);
    return *v;
  }

  double take_double(const std::string& key, double fallback) {
    auto v = take(key);
    return v ? parse_double(key, *v) : fallback;
  }

  std::int64_t take_int(const std::string& key, std::int64_t fallback) {
    auto v = take(key);
    return v ? parse_int(key, *v) : fallback;
  }

  std::uint64_t take_u64(const std::string& key, std::uint64_t fallback) {
    auto v = take(key);
    if (!v) return fallback;
    const std::string text = *v;
    std::uint64_t value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size())
      throw ParamError(key_where(key) + ": '" + key + "' expects a non-negative integer, got '" +
                       text + "'");
    return value;
  }

  bool take_bool(const std::string& key, bool fallback) {
    auto v = take(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1") return true;
    if (*v == "false" || *v == "0") return false;
    throw ParamError(key_where(key) + ": '" + key + "' expects true or false, got '" + *v + "'");
  }

  double parse_double(const std::string& key, const std::string& text) {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size())
      throw ParamError(key_where(key) + ": '" + key + "' expects a number, got '" + text + "'");
    return value;
  }

  std::int64_t parse_int(const std::string& key, const std::string& text) {
    std::int64_t value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size())
      throw ParamError(key_where(key) + ": '" + key + "' expects an integer, got '" + text + "'");
    return value;
  }

  // Rejects unconsumed keys unless they live in a known section the running
  // command does not read.
  void finish(const std::set<std::string>& read_sections) const {
    static const std::set<std::string> known_sections = {
        "gram", "bound", "estimate", "verify", "train",
        "certify", "sweep", "data", "kernel", "ceiling"};
    for (const auto& [key, entry] : entries_) {
      if (entry.consumed) continue;
      const auto dot = key.find('.');
      const std::string section = dot == std::string::npos ? "" : key.substr(0, dot);
      if (!section.empty() && known_sections.count(section) && !read_sections.count(section))
        continue;
      throw ParamError(key_where(key) + ": unknown key '" + key + "'");
    }
  }

  json echo() const {
    // Delivery-only keys must not change the canonical report: the same
    // computation written to two paths or thread caps stays byte-identical.
    json j = json::object();
    for (const auto& [key, entry] : entries_) {
      if (key == "out" || key == "threads") continue;
      j[key] = entry.value;
    }
    return j;
  }

 private:
  struct Entry {
    std::string value;
    int line = 0;
    bool consumed = false;
  };

  static std::optional<int> entries_find(const Config& cfg, const std::string& key) {
    auto it = cfg.entries_.find(key);
    if (it == cfg.entries_.end()) return std::nullopt;
    return it->second.line;
  }

  std::string where(int line) const { return path_ + ":" + std::to_string(line); }

  std::string key_where(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end() || it->second.line == 0) return "command line";
    return where(it->second.line);
  }

  std::string path_ = "<no config>";
  std::map<std::string, Entry> entries_;
};

struct Globals {
  double rho = 1.0;
  double delta = 0.05;
  std::optional<std::string> family;
  std::uint64_t seed = 0;
  std::optional<std::string> out;
};

struct CommandOutcome {
  json result;
  int exit_code = 0;
  bool used_seed = false;
  std::optional<std::string> csv;  // sweep artifact body
};

Globals read_globals(Config& cfg) {
  Globals g;
  g.rho = cfg.take_double("rho", 1.0);
  g.delta = cfg.take_double("delta", 0.05);
  g.family = cfg.take("family");
  g.seed = cfg.take_u64("seed", 0);
  g.out = cfg.take("out");
  const int threads = static_cast<int>(cfg.take_int("threads", 0));
  if (threads < 0) throw ParamError("config: 'threads' must be >= 0");
  set_thread_cap(threads);
  return g;
}

FamilyTag tag_from_string(const std::string& name) {
  if (name == "l1") return FamilyTag::L1;
  if (name == "l2") return FamilyTag::L2;
  if (name == "l2signed") return FamilyTag::L2Signed;
  throw ParamError("family must be l1, l2, or l2signed; got '" + name + "'");
}

BoundFamily bound_family_from_string(const std::string& name) {
  if (name == "l1") return BoundFamily::L1;
  if (name == "l2") return BoundFamily::L2;
  throw ParamError("family must be l1 or l2 here; got '" + name + "'");
}

Sample load_sample(Config& cfg, const std::string& command) {
  const std::string path = cfg.take_required("data.path", "for " + command);
  const std::string format = cfg.take("data.format").value_or("csv");
  if (format == "csv") {
    CsvOptions options;
    options.has_header = cfg.take_bool("data.hasHeader", false);
    const std::string label = cfg.take("data.labelColumn").value_or("auto");
    if (label == "auto")
      options.label_column = CsvOptions::LabelColumn::Auto;
    else if (label == "last")
      options.label_column = CsvOptions::LabelColumn::Last;
    else if (label == "none")
      options.label_column = CsvOptions::LabelColumn::None;
    else
      throw ParamError("data.labelColumn must be auto, last, or none; got '" + label + "'");
    return load_csv(path, options);
  }
  if (format == "sparse") return load_sparse(path);
  throw ParamError("data.format must be csv or sparse; got '" + format + "'");
}

std::vector<KernelSpec> load_kernel_specs(Config& cfg, bool required) {
  std::vector<KernelSpec> specs;
  for (int i = 1;; ++i) {
    const std::string base = "kernel." + std::to_string(i) + ".";
    const auto kind = cfg.take(base + "kind");
    if (!kind) break;
    const std::string name = cfg.take(base + "name").value_or("");
    if (*kind == "linear") {
      specs.push_back(KernelSpec::linear(name));
    } else if (*kind == "polynomial") {
      const int degree = static_cast<int>(cfg.take_int(base + "degree", 2));
      const double offset = cfg.take_double(base + "offset", 0.0);
      specs.push_back(KernelSpec::polynomial(degree, offset, name));
    } else if (*kind == "gaussian") {
      const double gamma = cfg.take_double(base + "gamma", 1.0);
      specs.push_back(KernelSpec::gaussian(gamma, name));
    } else {
      throw ParamError(base + "kind must be linear, polynomial, or gaussian; got '" + *kind +
                       "'");
    }
  }
  if (specs.empty() && required)
    throw ParamError("config: at least 'kernel.1.kind' is required");
  return specs;
}

KernelDictionary load_dictionary(Config& cfg, const Sample& sample,
                                 const std::vector<KernelSpec>& specs) {
  const std::string policy = cfg.take("ceiling.policy").value_or("sample");
  if (policy == "sample") {
    if (cfg.has("ceiling.r2")) throw ParamError("ceiling.r2 is only valid with ceiling.policy = user");
    return build_dictionary(sample, specs, CeilingPolicy::FromSample);
  }
  if (policy == "user") {
    const double r2 = cfg.take_double("ceiling.r2", 0.0);
    return build_dictionary(sample, specs, CeilingPolicy::UserValue, r2);
  }
  throw ParamError("ceiling.policy must be sample or user; got '" + policy + "'");
}

CommandOutcome cmd_gram(Config& cfg) {
  const Sample sample = load_sample(cfg, "gram");
  const auto specs = load_kernel_specs(cfg, true);
  const std::string dir = cfg.take("gram.dir").value_or("gram_cache");
  const KernelDictionary dict = load_dictionary(cfg, sample, specs);

  json kernels = json::array();
  for (int k = 0; k < dict.p(); ++k) {
    save_gram_cache(dir, dict.gram(k), dict.spec(k));
    const auto diag = validate_psd(dict.gram(k));
    kernels.push_back(json{{"name", dict.spec(k).name},
                           {"m", dict.gram(k).size()},
                           {"trace", json_number(dict.gram(k).trace())},
                           {"minEig", json_number(diag.min_eig)},
                           {"maxEig", json_number(diag.max_eig)}});
  }
  CommandOutcome out;
  out.result = json{{"dir", dir}, {"kernels", kernels}};
  return out;
}

BoundReport trace_row(const DictionarySummary& s, double rho, BoundFamily family, int r) {
  BoundReport row;
  row.family = family;
  row.form = BoundForm::Trace;
  row.r = r;
  row.value = trace_bound(s.traces, s.m, rho, r, family);
  row.p = s.p;
  row.m = s.m;
  row.rho = rho;
  row.kernel_ceiling_r2 = s.kernel_ceiling_r2;
  return row;
}

CommandOutcome cmd_bound(Config& cfg, const Globals& g) {
  const Sample sample = load_sample(cfg, "bound");
  const auto specs = load_kernel_specs(cfg, true);
  const KernelDictionary dict = load_dictionary(cfg, sample, specs);
  const DictionarySummary s = summarize(dict);
  MarginConfig margin{g.rho, g.delta};
  margin.validate();

  std::vector<BoundFamily> families;
  if (g.family)
    families.push_back(bound_family_from_string(*g.family));
  else
    families = {BoundFamily::L1, BoundFamily::L2};

  std::vector<BoundReport> rows;
  for (BoundFamily family : families) {
    rows.push_back(trace_row(s, g.rho, family, 2));
    rows.push_back(trace_row(s, g.rho, family, 4));

    BoundReport ceiling;
    ceiling.family = family;
    ceiling.form = BoundForm::Ceiling;
    ceiling.p = s.p;
    ceiling.m = s.m;
    ceiling.rho = g.rho;
    ceiling.kernel_ceiling_r2 = s.kernel_ceiling_r2;
    const auto value = ceiling_bound(s.p, s.kernel_ceiling_r2, g.rho, s.m, family);
    if (value)
      ceiling.value = *value;
    else
      ceiling.reason = "defined only for p >= 2; use the r = 2 trace form";
    rows.push_back(ceiling);

    if (family == BoundFamily::L1) {
      const auto opt = optimize_even_r(s.p, s.kernel_ceiling_r2, g.rho, s.m, family);
      BoundReport best;
      best.family = family;
      best.form = BoundForm::EvenROptimized;
      best.r = opt.r;
      best.value = opt.value;
      best.p = s.p;
      best.m = s.m;
      best.rho = g.rho;
      best.kernel_ceiling_r2 = s.kernel_ceiling_r2;
      rows.push_back(best);

      const auto comparator = comparator_sb(s.p, s.kernel_ceiling_r2, g.rho, s.m);
      BoundReport cmp;
      cmp.family = family;
      cmp.form = BoundForm::ComparatorSB;
      cmp.value = comparator.value;
      cmp.reason = comparator.reason;
      cmp.p = s.p;
      cmp.m = s.m;
      cmp.rho = g.rho;
      cmp.kernel_ceiling_r2 = s.kernel_ceiling_r2;
      rows.push_back(cmp);
    }
  }

  CommandOutcome out;
  out.result = json{{"bounds", to_json(rows)}};
  return out;
}

CommandOutcome cmd_estimate(Config& cfg, const Globals& g) {
  const Sample sample = load_sample(cfg, "estimate");
  const auto specs = load_kernel_specs(cfg, true);
  const KernelDictionary dict = load_dictionary(cfg, sample, specs);

  HypothesisFamily family;
  family.tag = tag_from_string(g.family.value_or("l1"));
  family.rho = g.rho;
  family.validate();

  const std::string method = cfg.take("estimate.method").value_or("mc");
  CommandOutcome out;
  if (method == "mc") {
    const std::int64_t trials = cfg.take_int("estimate.trials", 200000);
    const auto estimate = estimate_mc(dict, family, trials, g.seed);
    out.result = json{{"estimate", to_json(estimate)}};
    out.used_seed = true;
  } else if (method == "exact") {
    const int cap = static_cast<int>(cfg.take_int("estimate.exactCap", kDefaultExactCap));
    const auto estimate = estimate_exact(dict, family, cap);
    out.result = json{{"estimate", to_json(estimate)}};
  } else {
    throw ParamError("estimate.method must be mc or exact; got '" + method + "'");
  }
  return out;
}

CommandOutcome cmd_verify(Config& cfg, const Globals& g) {
  (void)cfg;
  const auto suites = run_verify_suite(g.seed);
  bool all_hold = true;
  json checks = json::array();
  for (const auto& suite : suites) {
    checks.push_back(to_json(suite));
    if (suite.failures > 0) all_hold = false;
  }
  CommandOutcome out;
  out.result = json{{"checks", checks}, {"allHold", all_hold}};
  out.exit_code = all_hold ? 0 : 1;
  out.used_seed = true;
  return out;
}

TrainOptions train_options(Config& cfg) {
  TrainOptions options;
  options.reg_c = cfg.take_double("train.c", options.reg_c);
  options.max_outer = static_cast<int>(cfg.take_int("train.maxOuter", options.max_outer));
  options.tol = cfg.take_double("train.tol", options.tol);
  options.max_inner = static_cast<int>(cfg.take_int("train.maxInner", options.max_inner));
  options.inner_tol = cfg.take_double("train.innerTol", options.inner_tol);
  options.validate();
  return options;
}

CommandOutcome cmd_train(Config& cfg, const Globals& g) {
  const Sample sample = load_sample(cfg, "train");
  const auto specs = load_kernel_specs(cfg, true);
  const KernelDictionary dict = load_dictionary(cfg, sample, specs);
  const BoundFamily family = bound_family_from_string(g.family.value_or("l1"));
  const Model model = train(sample, dict, family, train_options(cfg));
  CommandOutcome out;
  out.result = to_json(model);
  return out;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
  return j;
}

void require_matching_specs(const std::vector<KernelSpec>& config_specs,
                            const std::vector<KernelSpec>& model_specs) {
  if (config_specs.size() != model_specs.size())
    throw ParamError("config lists " + std::to_string(config_specs.size()) +
                     " kernels but the model has " + std::to_string(model_specs.size()));
  for (std::size_t k = 0; k < config_specs.size(); ++k) {
    const auto& a = config_specs[k];
    const auto& b = model_specs[k];
    const bool same = a.kind == b.kind &&
                      (a.kind != KernelSpec::Kind::Polynomial ||
                       (a.degree == b.degree && a.offset == b.offset)) &&
                      (a.kind != KernelSpec::Kind::Gaussian || a.gamma == b.gamma);
    if (!same)
      throw ParamError("kernel " + std::to_string(k + 1) +
                       " in the config disagrees with the model file");
  }
}

CommandOutcome cmd_certify(Config& cfg, const Globals& g) {
  const Sample sample = load_sample(cfg, "certify");
  const auto model_path = cfg.take("certify.model");

  Model model;
  std::vector<KernelSpec> specs;
  if (model_path) {
    json j = read_json_file(*model_path);
    if (j.contains("command") && j.contains("result")) j = j.at("result");
    model = model_from_json(j);
    const auto config_specs = load_kernel_specs(cfg, false);
    if (!config_specs.empty()) require_matching_specs(config_specs, model.kernel_specs);
    specs = model.kernel_specs;
  } else {
    specs = load_kernel_specs(cfg, true);
  }

  const KernelDictionary dict = load_dictionary(cfg, sample, specs);
  if (!model_path) {
    const BoundFamily family = bound_family_from_string(g.family.value_or("l1"));
    model = train(sample, dict, family, train_options(cfg));
  } else {
    if (model.alpha.size() != sample.size())
      throw DataError("model has " + std::to_string(model.alpha.size()) +
                      " coefficients but the sample has " + std::to_string(sample.size()) +
                      " points");
    const std::string sample_ref = hash_hex(sample_hash(sample));
    if (model.train_sample_ref != sample_ref)
      throw DataError("model was trained on a different sample (hash " +
                      model.train_sample_ref + ", this sample " + sample_ref + ")");
  }

  MarginConfig margin{g.rho, g.delta};
  margin.validate();

  BoundChoice choice;
  const std::string bound = cfg.take("certify.bound").value_or("ceiling");
  if (bound == "ceiling") {
    choice.kind = BoundChoice::Kind::Ceiling;
  } else if (bound == "traceR") {
    choice.kind = BoundChoice::Kind::TraceR;
    choice.r = static_cast<int>(cfg.take_int("certify.r", 2));
  } else if (bound == "empiricalExact") {
    choice.kind = BoundChoice::Kind::EmpiricalExact;
    choice.exact_cap = static_cast<int>(cfg.take_int("certify.exactCap", kDefaultExactCap));
  } else if (bound == "empiricalMC") {
    choice.kind = BoundChoice::Kind::EmpiricalMc;
    choice.mc_trials = cfg.take_int("certify.trials", 200000);
    choice.mc_seed = g.seed;
  } else {
    throw ParamError("certify.bound must be ceiling, traceR, empiricalExact, or empiricalMC; got '" +
                     bound + "'");
  }

  const Certificate cert = certify(model, sample, dict, margin, choice);
  CommandOutcome out;
  out.result = json{{"certificate", to_json(cert)}};
  out.used_seed = choice.kind == BoundChoice::Kind::EmpiricalMc;
  return out;
}

CommandOutcome cmd_sweep(Config& cfg, const Globals& g) {
  DictionarySummary summary;
  if (cfg.has("data.path")) {
    const Sample sample = load_sample(cfg, "sweep");
    const auto specs = load_kernel_specs(cfg, true);
    summary = summarize(load_dictionary(cfg, sample, specs));
  } else {
    summary.m = static_cast<int>(cfg.take_int("sweep.m", 0));
    if (summary.m < 1) throw ParamError("config: 'sweep.m' (>= 1) is required without data.path");
    summary.kernel_ceiling_r2 = cfg.take_double("sweep.r2", 0.0);
    if (!(summary.kernel_ceiling_r2 > 0.0))
      throw ParamError("config: 'sweep.r2' (> 0) is required without data.path");
    summary.p = 1;
  }

  const std::string p_list = cfg.take_required("sweep.pValues", "for sweep");
  std::vector<std::int64_t> p_values;
  std::istringstream items(p_list);
  std::string item;
  while (std::getline(items, item, ',')) {
    const std::string text = trim(item);
    std::int64_t p = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), p);
    if (ec != std::errc() || ptr != text.data() + text.size() || p < 1)
      throw ParamError("sweep.pValues expects positive integers, got '" + item + "'");
    p_values.push_back(p);
  }
  if (p_values.empty()) throw ParamError("sweep.pValues is empty");

  const auto rows = sweep_bounds(summary, g.rho, p_values);
  CommandOutcome out;
  out.result = json{{"rows", to_json(rows)}};
  out.csv = sweep_to_csv(rows);
  return out;
}

std::string iso_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string strip_meta(json envelope) {
  envelope.erase("meta");
  return envelope.dump(2) + "\n";
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

// Append-only artifact policy: an existing file with the same canonical
// content is kept as is; different content goes to <stem>-<hash8><ext>.
void emit_artifact(const fs::path& path, const std::string& full,
                   const std::string& canonical, bool json_envelope) {
  const auto canonical_of = [&](const fs::path& p) -> std::optional<std::string> {
    std::ifstream in(p, std::ios::binary);
    if (!in) return std::nullopt;
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (!json_envelope) return text;
    try {
      json j = json::parse(text);
      return strip_meta(std::move(j));
    } catch (const json::exception&) {
      return std::nullopt;
    }
  };

  if (!fs::exists(path)) {
    write_file(path, full);
    std::cout << "report: " << path.string() << "\n";
    return;
  }
  const auto existing = canonical_of(path);
  if (existing && *existing == canonical) {
    std::cout << "report unchanged: " << path.string() << "\n";
    return;
  }
  const std::string suffix = hash_hex(fnv1a64(canonical)).substr(0, 8);
  const fs::path alt =
      path.parent_path() / (path.stem().string() + "-" + suffix + path.extension().string());
  if (fs::exists(alt)) {
    const auto alt_existing = canonical_of(alt);
    if (alt_existing && *alt_existing == canonical) {
      std::cout << "report unchanged: " << alt.string() << "\n";
      return;
    }
    throw DataError("refusing to overwrite " + alt.string());
  }
  write_file(alt, full);
  std::cout << "report: " << alt.string() << "\n";
}

std::set<std::string> sections_for(const std::string& command) {
  if (command == "gram") return {"gram", "data", "kernel", "ceiling"};
  if (command == "bound") return {"bound", "data", "kernel", "ceiling"};
  if (command == "estimate") return {"estimate", "data", "kernel", "ceiling"};
  if (command == "verify") return {"verify"};
  if (command == "train") return {"train", "data", "kernel", "ceiling"};
  if (command == "certify") return {"certify", "train", "data", "kernel", "ceiling"};
  return {"sweep", "data", "kernel", "ceiling"};
}

int dispatch(const std::string& command, Config& cfg) {
  const Globals g = read_globals(cfg);

  CommandOutcome outcome;
  if (command == "gram")
    outcome = cmd_gram(cfg);
  else if (command == "bound")
    outcome = cmd_bound(cfg, g);
  else if (command == "estimate")
    outcome = cmd_estimate(cfg, g);
  else if (command == "verify")
    outcome = cmd_verify(cfg, g);
  else if (command == "train")
    outcome = cmd_train(cfg, g);
  else if (command == "certify")
    outcome = cmd_certify(cfg, g);
  else
    outcome = cmd_sweep(cfg, g);

  cfg.finish(sections_for(command));

  json envelope{{"command", command},
                {"version", kVersion},
                {"config", cfg.echo()},
                {"result", outcome.result}};
  if (outcome.used_seed) envelope["seed"] = g.seed;
  envelope["meta"] = json{{"timestamp", iso_timestamp()}};

  const std::string canonical = strip_meta(envelope);
  const std::string full = envelope.dump(2) + "\n";
  if (g.out) {
    emit_artifact(*g.out, full, canonical, true);
    if (outcome.csv) {
      fs::path csv_path(*g.out);
      csv_path.replace_extension(".csv");
      emit_artifact(csv_path, *outcome.csv, *outcome.csv, false);
    }
  } else {
    std::cout << full;
    if (outcome.csv) std::cout << *outcome.csv;
  }
  return outcome.exit_code;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"margin bounds for learned kernel combinations"};
  app.require_subcommand(1);

  std::string config_path;
  double rho = 0.0;
  double delta = 0.0;
  std::string family;
  std::int64_t trials = 0;
  std::uint64_t seed = 0;
  int threads = 0;
  std::string out;

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"gram", "compute and cache Gram matrices"},
      {"bound", "closed-form complexity bounds for one dictionary"},
      {"estimate", "empirical Rademacher complexity estimate"},
      {"verify", "run the proof-inequality suite"},
      {"train", "fit combination weights and dual coefficients"},
      {"certify", "margin-based generalization certificate"},
      {"sweep", "bound table across kernel counts"}};
  for (const auto& [name, description] : commands) {
    CLI::App* sub = app.add_subcommand(name, description);
    sub->add_option("--config", config_path, "flat key = value configuration file");
    sub->add_option("--rho", rho, "margin (> 0)");
    sub->add_option("--delta", delta, "confidence level in (0, 1)");
    sub->add_option("--family", family, "hypothesis family: l1, l2, or l2signed");
    sub->add_option("--trials", trials, "Monte Carlo trial count");
    sub->add_option("--seed", seed, "random seed");
    sub->add_option("--threads", threads, "worker cap (0 = auto)");
    sub->add_option("--out", out, "report path (append-only)");
  }

  try {
    try {
      app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e);
      return code == 0 ? 0 : 2;
    }

    CLI::App* active = app.get_subcommands().front();
    const std::string command = active->get_name();

    Config cfg = config_path.empty() ? Config() : Config::load(config_path);
    if (active->count("--rho")) cfg.override_value("rho", active->get_option("--rho")->as<std::string>());
    if (active->count("--delta"))
      cfg.override_value("delta", active->get_option("--delta")->as<std::string>());
    if (active->count("--family")) cfg.override_value("family", family);
    if (active->count("--seed"))
      cfg.override_value("seed", active->get_option("--seed")->as<std::string>());
    if (active->count("--threads"))
      cfg.override_value("threads", active->get_option("--threads")->as<std::string>());
    if (active->count("--out")) cfg.override_value("out", out);
    if (active->count("--trials")) {
      if (command == "estimate")
        cfg.override_value("estimate.trials", active->get_option("--trials")->as<std::string>());
      else if (command == "certify")
        cfg.override_value("certify.trials", active->get_option("--trials")->as<std::string>());
      else
        throw ParamError("--trials applies to estimate and certify only");
    }

    return dispatch(command, cfg);
  } catch (const ParamError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<std::string> full;
  full.reserve(args.size() + 1);
  full.push_back("kernbound");
  full.insert(full.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  argv.reserve(full.size());
  for (const auto& arg : full) argv.push_back(arg.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace kernbound

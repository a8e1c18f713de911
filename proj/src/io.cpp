#include "kernbound/io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "kernbound/errors.hpp"
#include "kernbound/learner.hpp"

namespace kernbound {
namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

// Streams heterogeneous fields into one FNV-1a state; numbers enter as
// little-endian bytes of their bit patterns so the hash is
// platform-independent.
class Hasher {
 public:
  void bytes(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      h_ ^= p[i];
      h_ *= kFnvPrime;
    }
  }

  void u64(std::uint64_t v) {
    std::array<unsigned char, 8> b{};
    for (int i = 0; i < 8; ++i) b[static_cast<std::size_t>(i)] = static_cast<unsigned char>(v >> (8 * i));
    bytes(b.data(), b.size());
  }

  void f64(double v) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, &v, sizeof bits);
    u64(bits);
  }

  void str(const std::string& s) {
    u64(s.size());
    bytes(s.data(), s.size());
  }

  std::uint64_t digest() const { return h_; }

 private:
  std::uint64_t h_ = kFnvOffset;
};

std::string trim(std::string s) {
  const auto* ws = " \t\r\n";
  const auto begin = s.find_first_not_of(ws);
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(ws);
  return s.substr(begin, end - begin + 1);
}

double parse_number(const std::string& cell, const std::filesystem::path& path,
                    int line, const char* what) {
  const std::string text = trim(cell);
  double value = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || text.empty()) {
    std::ostringstream msg;
    msg << path.string() << ":" << line << ": cannot parse " << what << " '"
        << cell << "'";
    throw DataError(msg.str());
  }
  return value;
}

int label_from_value(double v, const std::filesystem::path& path, int line) {
  if (v == 1.0) return 1;
  if (v == -1.0) return -1;
  std::ostringstream msg;
  msg << path.string() << ":" << line << ": label must be +1 or -1, got " << v;
  throw DataError(msg.str());
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> cells;
  std::string::size_type start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string::npos) {
      cells.push_back(line.substr(start));
      return cells;
    }
    cells.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

void write_le_doubles(std::ostream& out, const Eigen::MatrixXd& entries) {
  for (Eigen::Index i = 0; i < entries.rows(); ++i) {
    for (Eigen::Index j = 0; j < entries.cols(); ++j) {
      std::uint64_t bits = 0;
      const double v = entries(i, j);
      std::memcpy(&bits, &v, sizeof bits);
      std::array<char, 8> b{};
      for (int k = 0; k < 8; ++k) b[static_cast<std::size_t>(k)] = static_cast<char>((bits >> (8 * k)) & 0xff);
      out.write(b.data(), b.size());
    }
  }
}

double read_le_double(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int k = 7; k >= 0; --k) bits = (bits << 8) | p[k];
  double v = 0.0;
  std::memcpy(&v, &bits, sizeof v);
  return v;
}

std::string cache_name(const KernelSpec& spec) {
  return spec.name.empty() ? spec.kind_name() : spec.name;
}

}  // namespace

std::uint64_t fnv1a64(const void* data, std::size_t len) {
  Hasher h;
  h.bytes(data, len);
  return h.digest();
}

std::uint64_t fnv1a64(const std::string& text) {
  return fnv1a64(text.data(), text.size());
}

std::string hash_hex(std::uint64_t h) {
  std::ostringstream out;
  out << std::hex << std::setfill('0') << std::setw(16) << h;
  return out.str();
}

std::uint64_t sample_hash(const Sample& sample) {
  Hasher h;
  h.u64(static_cast<std::uint64_t>(sample.size()));
  h.u64(static_cast<std::uint64_t>(sample.dim()));
  const auto& x = sample.points();
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j) h.f64(x(i, j));
  h.u64(sample.has_labels() ? 1 : 0);
  if (sample.has_labels())
    for (int y : sample.labels()) h.u64(static_cast<std::uint64_t>(static_cast<std::int64_t>(y)));
  return h.digest();
}

std::uint64_t dictionary_hash(const KernelDictionary& dict) {
  Hasher h;
  h.u64(static_cast<std::uint64_t>(dict.m()));
  h.u64(static_cast<std::uint64_t>(dict.p()));
  h.f64(dict.kernel_ceiling_r2());
  for (int k = 0; k < dict.p(); ++k) {
    const KernelSpec& spec = dict.spec(k);
    h.str(spec.kind_name());
    h.str(spec.name);
    h.u64(static_cast<std::uint64_t>(spec.degree));
    h.f64(spec.offset);
    h.f64(spec.gamma);
    h.f64(dict.gram(k).trace());
  }
  return h.digest();
}

Sample load_csv(const std::filesystem::path& path, const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());

  std::vector<std::vector<double>> rows;
  std::vector<int> row_lines;
  std::string line;
  int lineno = 0;
  bool header_pending = options.has_header;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    if (header_pending) {
      header_pending = false;
      continue;
    }
    const auto cells = split(line, ',');
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& cell : cells) row.push_back(parse_number(cell, path, lineno, "value"));
    if (!rows.empty() && row.size() != rows.front().size()) {
      std::ostringstream msg;
      msg << path.string() << ":" << lineno << ": expected " << rows.front().size()
          << " columns, got " << row.size();
      throw DataError(msg.str());
    }
    rows.push_back(std::move(row));
    row_lines.push_back(lineno);
  }
  if (rows.empty()) throw DataError(path.string() + ": no data rows");

  const int cols = static_cast<int>(rows.front().size());
  bool take_labels = false;
  switch (options.label_column) {
    case CsvOptions::LabelColumn::None:
      break;
    case CsvOptions::LabelColumn::Last:
      if (cols < 2)
        throw DataError(path.string() + ": label column needs at least 2 columns");
      take_labels = true;
      break;
    case CsvOptions::LabelColumn::Auto: {
      take_labels = cols >= 2;
      for (const auto& row : rows) {
        const double v = row.back();
        if (v != 1.0 && v != -1.0) {
          take_labels = false;
          break;
        }
      }
      break;
    }
  }

  const int d = cols - (take_labels ? 1 : 0);
  Eigen::MatrixXd points(static_cast<Eigen::Index>(rows.size()), d);
  std::optional<std::vector<int>> labels;
  if (take_labels) labels.emplace();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (int j = 0; j < d; ++j) points(static_cast<Eigen::Index>(i), j) = rows[i][static_cast<std::size_t>(j)];
    if (take_labels)
      labels->push_back(label_from_value(rows[i].back(), path, row_lines[i]));
  }
  return Sample(std::move(points), std::move(labels));
}

Sample load_sparse(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());

  struct Row {
    int label = 0;
    std::vector<std::pair<int, double>> entries;
  };
  std::vector<Row> rows;
  int max_index = 0;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string text = trim(line);
    if (text.empty()) continue;
    std::istringstream tokens(text);
    std::string token;
    tokens >> token;
    Row row;
    row.label = label_from_value(parse_number(token, path, lineno, "label"), path, lineno);
    while (tokens >> token) {
      const auto colon = token.find(':');
      if (colon == std::string::npos || colon == 0 || colon + 1 == token.size()) {
        std::ostringstream msg;
        msg << path.string() << ":" << lineno << ": expected idx:val, got '" << token << "'";
        throw DataError(msg.str());
      }
      const double idx_value = parse_number(token.substr(0, colon), path, lineno, "index");
      const int idx = static_cast<int>(idx_value);
      if (idx < 1 || static_cast<double>(idx) != idx_value) {
        std::ostringstream msg;
        msg << path.string() << ":" << lineno << ": index must be a positive integer, got '"
            << token.substr(0, colon) << "'";
        throw DataError(msg.str());
      }
      for (const auto& [seen, unused] : row.entries) {
        (void)unused;
        if (seen == idx) {
          std::ostringstream msg;
          msg << path.string() << ":" << lineno << ": duplicate index " << idx;
          throw DataError(msg.str());
        }
      }
      row.entries.emplace_back(idx, parse_number(token.substr(colon + 1), path, lineno, "value"));
      max_index = std::max(max_index, idx);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError(path.string() + ": no data rows");
  if (max_index == 0) throw DataError(path.string() + ": no feature indices");

  Eigen::MatrixXd points = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), max_index);
  std::vector<int> labels;
  labels.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    labels.push_back(rows[i].label);
    for (const auto& [idx, value] : rows[i].entries)
      points(static_cast<Eigen::Index>(i), idx - 1) = value;
  }
  return Sample(std::move(points), std::move(labels));
}

void save_gram_cache(const std::filesystem::path& dir, const GramMatrix& gram,
                     const KernelSpec& spec) {
  spec.validate();
  std::filesystem::create_directories(dir);
  const std::string name = cache_name(spec);

  nlohmann::json meta{{"m", gram.size()},
                      {"kernel", name},
                      {"spec", to_json(spec)},
                      {"trace", json_number(gram.trace())}};
  std::ofstream meta_out(dir / (name + ".json"));
  if (!meta_out) throw DataError("cannot write " + (dir / (name + ".json")).string());
  meta_out << meta.dump(2) << '\n';

  std::ofstream bin_out(dir / (name + ".f64"), std::ios::binary);
  if (!bin_out) throw DataError("cannot write " + (dir / (name + ".f64")).string());
  write_le_doubles(bin_out, gram.entries());
  if (!bin_out) throw DataError("failed writing " + (dir / (name + ".f64")).string());
}

GramMatrix load_gram_cache(const std::filesystem::path& dir,
                           const std::string& name, KernelSpec* spec_out) {
  const auto meta_path = dir / (name + ".json");
  std::ifstream meta_in(meta_path);
  if (!meta_in) throw DataError("cannot open " + meta_path.string());
  nlohmann::json meta;
  try {
    meta_in >> meta;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(meta_path.string() + ": " + e.what());
  }
  if (!meta.contains("m") || !meta.contains("trace") || !meta.contains("spec"))
    throw DataError(meta_path.string() + ": missing m, trace, or spec");
  const int m = meta.at("m").get<int>();
  if (m < 1) throw DataError(meta_path.string() + ": m must be >= 1");
  const double trace = meta.at("trace").get<double>();
  const KernelSpec spec = kernel_spec_from_json(meta.at("spec"));

  const auto bin_path = dir / (name + ".f64");
  std::ifstream bin_in(bin_path, std::ios::binary);
  if (!bin_in) throw DataError("cannot open " + bin_path.string());
  std::vector<unsigned char> raw((std::istreambuf_iterator<char>(bin_in)),
                                 std::istreambuf_iterator<char>());
  const std::size_t expected = static_cast<std::size_t>(m) * static_cast<std::size_t>(m) * 8;
  if (raw.size() != expected) {
    std::ostringstream msg;
    msg << bin_path.string() << ": expected " << expected << " bytes, got " << raw.size();
    throw DataError(msg.str());
  }

  Eigen::MatrixXd entries(m, m);
  std::size_t offset = 0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j, offset += 8)
      entries(i, j) = read_le_double(raw.data() + offset);
  GramMatrix gram = GramMatrix::from_entries(std::move(entries));
  if (std::abs(gram.trace() - trace) > 1e-9 * std::max(1.0, std::abs(trace))) {
    std::ostringstream msg;
    msg << bin_path.string() << ": trace " << gram.trace()
        << " disagrees with metadata trace " << trace;
    throw DataError(msg.str());
  }
  if (spec_out) *spec_out = spec;
  return gram;
}

nlohmann::json json_number(double v) {
  if (!std::isfinite(v)) throw DataError("refusing to serialize a non-finite number");
  return v;
}

nlohmann::json to_json(const KernelSpec& spec) {
  nlohmann::json j{{"kind", spec.kind_name()}, {"name", spec.name}};
  switch (spec.kind) {
    case KernelSpec::Kind::Linear:
      break;
    case KernelSpec::Kind::Polynomial:
      j["degree"] = spec.degree;
      j["offset"] = json_number(spec.offset);
      break;
    case KernelSpec::Kind::Gaussian:
      j["gamma"] = json_number(spec.gamma);
      break;
  }
  return j;
}

KernelSpec kernel_spec_from_json(const nlohmann::json& j) {
  try {
    const std::string kind = j.at("kind").get<std::string>();
    const std::string name = j.value("name", std::string());
    if (kind == "linear") return KernelSpec::linear(name);
    if (kind == "polynomial")
      return KernelSpec::polynomial(j.at("degree").get<int>(), j.at("offset").get<double>(), name);
    if (kind == "gaussian") return KernelSpec::gaussian(j.at("gamma").get<double>(), name);
    throw DataError("unknown kernel kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad kernel spec: ") + e.what());
  }
}

nlohmann::json to_json(const RademacherEstimate& estimate) {
  nlohmann::json j{{"value", json_number(estimate.value)},
                   {"stderr", json_number(estimate.std_error)},
                   {"trials", estimate.trials},
                   {"method", estimate.method == RademacherEstimate::Method::MonteCarlo
                                  ? "monteCarlo"
                                  : "exactEnumeration"},
                   {"family", family_tag_name(estimate.family)},
                   {"rho", json_number(estimate.rho)},
                   {"m", estimate.m},
                   {"p", estimate.p}};
  if (estimate.seed) j["seed"] = *estimate.seed;
  return j;
}

nlohmann::json to_json(const BoundReport& report) {
  nlohmann::json j{{"family", family_name(report.family)},
                   {"form", form_name(report.form)},
                   {"p", report.p},
                   {"m", report.m},
                   {"rho", json_number(report.rho)},
                   {"R2", json_number(report.kernel_ceiling_r2)}};
  if (report.r) j["r"] = *report.r;
  if (report.value) {
    j["value"] = json_number(*report.value);
  } else {
    j["value"] = "n/a";
    if (!report.reason.empty()) j["reason"] = report.reason;
  }
  return j;
}

nlohmann::json to_json(const std::vector<BoundReport>& reports) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& report : reports) j.push_back(to_json(report));
  return j;
}

nlohmann::json to_json(const InequalityResult& result) {
  return nlohmann::json{{"lhs", json_number(result.lhs)},
                        {"rhs", json_number(result.rhs)},
                        {"holds", result.holds},
                        {"slack", json_number(result.slack)}};
}

nlohmann::json to_json(const SuiteResult& suite) {
  return nlohmann::json{{"check", suite.check},
                        {"instances", suite.instances},
                        {"failures", suite.failures},
                        {"minSlack", json_number(suite.min_slack)}};
}

nlohmann::json to_json(const Model& model) {
  nlohmann::json specs = nlohmann::json::array();
  for (const auto& spec : model.kernel_specs) specs.push_back(to_json(spec));
  nlohmann::json mu = nlohmann::json::array();
  for (Eigen::Index k = 0; k < model.mu.mu.size(); ++k) mu.push_back(json_number(model.mu.mu(k)));
  nlohmann::json alpha = nlohmann::json::array();
  for (Eigen::Index i = 0; i < model.alpha.size(); ++i) alpha.push_back(json_number(model.alpha(i)));
  nlohmann::json log = nlohmann::json::array();
  for (double v : model.objective_log) log.push_back(json_number(v));
  return nlohmann::json{{"family", family_name(model.family)},
                        {"kernelSpecs", specs},
                        {"mu", mu},
                        {"alpha", alpha},
                        {"trainSampleHash", model.train_sample_ref},
                        {"trainerLog", log},
                        {"converged", model.converged}};
}

Model model_from_json(const nlohmann::json& j) {
  Model model;
  try {
    const std::string family = j.at("family").get<std::string>();
    if (family == "L1") {
      model.family = BoundFamily::L1;
      model.mu.constraint = WeightConstraint::L1Simplex;
    } else if (family == "L2") {
      model.family = BoundFamily::L2;
      model.mu.constraint = WeightConstraint::L2Sphere;
    } else {
      throw DataError("unknown family '" + family + "'");
    }
    for (const auto& spec : j.at("kernelSpecs")) model.kernel_specs.push_back(kernel_spec_from_json(spec));
    const auto& mu = j.at("mu");
    model.mu.mu.resize(static_cast<Eigen::Index>(mu.size()));
    for (std::size_t k = 0; k < mu.size(); ++k)
      model.mu.mu(static_cast<Eigen::Index>(k)) = mu.at(k).get<double>();
    const auto& alpha = j.at("alpha");
    model.alpha.resize(static_cast<Eigen::Index>(alpha.size()));
    for (std::size_t i = 0; i < alpha.size(); ++i)
      model.alpha(static_cast<Eigen::Index>(i)) = alpha.at(i).get<double>();
    model.train_sample_ref = j.at("trainSampleHash").get<std::string>();
    if (j.contains("trainerLog"))
      for (const auto& v : j.at("trainerLog")) model.objective_log.push_back(v.get<double>());
    model.converged = j.value("converged", true);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad model file: ") + e.what());
  }
  if (model.kernel_specs.size() != static_cast<std::size_t>(model.mu.mu.size()))
    throw DataError("model file: mu length disagrees with kernelSpecs length");
  if (!model.mu.feasible())
    throw DataError("model file: mu violates the " + family_name(model.family) + " constraint");
  return model;
}

nlohmann::json to_json(const Certificate& cert) {
  nlohmann::json j{{"marginLoss", json_number(cert.margin_loss)},
                   {"complexityTerm", json_number(cert.complexity_term)},
                   {"confidenceTerm", json_number(cert.confidence_term)},
                   {"total", json_number(cert.total)},
                   {"boundChoice", cert.bound_choice},
                   {"rho", json_number(cert.rho)},
                   {"delta", json_number(cert.delta)},
                   {"m", cert.m},
                   {"p", cert.p},
                   {"dictionaryHash", hash_hex(cert.dictionary_hash)}};
  if (cert.seed) j["seed"] = *cert.seed;
  return j;
}

}  // namespace kernbound

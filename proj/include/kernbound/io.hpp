#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "kernbound/bounds.hpp"
#include "kernbound/kernel.hpp"
#include "kernbound/proof_checks.hpp"
#include "kernbound/rademacher.hpp"

namespace kernbound {

struct Model;
struct Certificate;

// Stable 64-bit content hashing (FNV-1a) for provenance fields and
// append-only report naming.
std::uint64_t fnv1a64(const void* data, std::size_t len);
std::uint64_t fnv1a64(const std::string& text);
std::string hash_hex(std::uint64_t h);

std::uint64_t sample_hash(const Sample& sample);
std::uint64_t dictionary_hash(const KernelDictionary& dict);

struct CsvOptions {
  enum class LabelColumn { Auto, Last, None };

  bool has_header = false;
  LabelColumn label_column = LabelColumn::Auto;
};

// Comma-separated feature columns with an optional trailing +-1 label
// column; Auto treats the last column as labels exactly when every value in
// it is +-1.
Sample load_csv(const std::filesystem::path& path, const CsvOptions& options = {});

// One point per line: "label idx:val idx:val ..." with 1-based indices;
// unmentioned coordinates are zero.
Sample load_sparse(const std::filesystem::path& path);

// Gram cache: <name>.json metadata (m, kernel name, spec parameters, trace)
// next to <name>.f64 raw little-endian float64 entries in row-major order.
void save_gram_cache(const std::filesystem::path& dir, const GramMatrix& gram,
                     const KernelSpec& spec);
GramMatrix load_gram_cache(const std::filesystem::path& dir,
                           const std::string& name,
                           KernelSpec* spec_out = nullptr);

// Throws rather than ever serializing a non-finite number.
nlohmann::json json_number(double v);

nlohmann::json to_json(const KernelSpec& spec);
KernelSpec kernel_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RademacherEstimate& estimate);
nlohmann::json to_json(const BoundReport& report);
nlohmann::json to_json(const std::vector<BoundReport>& reports);
nlohmann::json to_json(const InequalityResult& result);
nlohmann::json to_json(const SuiteResult& suite);
nlohmann::json to_json(const Model& model);
Model model_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Certificate& cert);

}  // namespace kernbound

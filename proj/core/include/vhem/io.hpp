#pragma once

// Text formats:
//  * model files: one JSON document with an explicit schema version, holding
//    an HMM or an H3M. Doubles are written in shortest round-trip form, so a
//    save/load cycle is bit-exact.
//  * datasets: JSON lines, one record {"id", "obs": [[...], ...], "label"?}
//    per line, so large corpora can be streamed portion by portion.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "vhem/h3m.hpp"
#include "vhem/hmm.hpp"

namespace vhem {

inline constexpr const char* kModelSchemaVersion = "vhem-model/1";

enum class ModelKind { Hmm, H3m };

struct ModelMetadata {
  int dim = 0;
  int n_states = 0;
  int n_mix = 0;
  int n_components = 0;
  CovarianceType covariance_type = CovarianceType::Diagonal;
  std::optional<std::uint64_t> seed;
};

struct ModelFile {
  std::string schema_version = kModelSchemaVersion;
  ModelKind kind = ModelKind::Hmm;
  H3m model;  // an HMM file holds a single component with weight 1
  ModelMetadata metadata;
};

std::string serialize_model(const ModelFile& file);
ModelFile parse_model(const std::string& text, const std::string& source = "<string>");

ModelFile make_model_file(const Hmm& model, std::optional<std::uint64_t> seed = std::nullopt);
ModelFile make_model_file(const H3m& model, std::optional<std::uint64_t> seed = std::nullopt);

void save_model(const std::filesystem::path& path, const ModelFile& file);
ModelFile load_model(const std::filesystem::path& path);

/// Loads a single HMM; an H3M file is accepted only when it has one component.
Hmm load_hmm(const std::filesystem::path& path);
/// Loads an H3M; an HMM file becomes a one-component mixture.
H3m load_h3m(const std::filesystem::path& path);

std::vector<Sequence> parse_dataset(std::istream& in, const std::string& source = "<stream>");
std::vector<Sequence> load_dataset(const std::filesystem::path& path);
void write_dataset(std::ostream& out, const std::vector<Sequence>& data);
void save_dataset(const std::filesystem::path& path, const std::vector<Sequence>& data);

/// Streams records one at a time; the callback receives (record, 1-based line).
void stream_dataset(std::istream& in, const std::string& source,
                    const std::function<void(Sequence&&, std::size_t)>& sink);

}  // namespace vhem

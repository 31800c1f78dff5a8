#include "vhem/io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

#include "vhem/errors.hpp"

namespace vhem {

using nlohmann::json;

namespace {

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(v[k]);
  return out;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(vector_to_json(m.row(r).transpose()));
  return out;
}

json hmm_to_json(const Hmm& model) {
  json out;
  out["initial"] = vector_to_json(model.initial);
  out["transitions"] = matrix_to_json(model.transitions);
  json emissions = json::array();
  for (const auto& gmm : model.emissions) {
    json e;
    e["weights"] = vector_to_json(gmm.weights);
    json means = json::array();
    json covs = json::array();
    for (const auto& g : gmm.components) {
      means.push_back(vector_to_json(g.mean));
      covs.push_back(g.type == CovarianceType::Diagonal ? vector_to_json(g.covariance.diagonal())
                                                        : matrix_to_json(g.covariance));
    }
    e["means"] = std::move(means);
    e["covariances"] = std::move(covs);
    emissions.push_back(std::move(e));
  }
  out["emissions"] = std::move(emissions);
  return out;
}

// Field-path aware accessors: every error names the offending location.
class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const std::string& path, const std::string& what) const {
    throw ParseError(source_ + ": " + path + ": " + what);
  }

  const json& field(const json& obj, const std::string& path, const char* key) const {
    if (!obj.is_object()) fail(path, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) fail(path, std::string("missing field '") + key + "'");
    return *it;
  }

  double number(const json& v, const std::string& path) const {
    if (!v.is_number()) fail(path, "expected a number");
    return v.get<double>();
  }

  int integer(const json& v, const std::string& path) const {
    if (!v.is_number_integer()) fail(path, "expected an integer");
    return v.get<int>();
  }

  Eigen::VectorXd vector(const json& v, const std::string& path, Eigen::Index expected = -1) const {
    if (!v.is_array()) fail(path, "expected an array");
    if (expected >= 0 && static_cast<Eigen::Index>(v.size()) != expected) {
      fail(path, "expected " + std::to_string(expected) + " entries, found " + std::to_string(v.size()));
    }
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t k = 0; k < v.size(); ++k) {
      out[static_cast<Eigen::Index>(k)] = number(v[k], path + "[" + std::to_string(k) + "]");
    }
    return out;
  }

  Eigen::MatrixXd matrix(const json& v, const std::string& path, Eigen::Index rows, Eigen::Index cols) const {
    if (!v.is_array()) fail(path, "expected an array of rows");
    if (rows >= 0 && static_cast<Eigen::Index>(v.size()) != rows) {
      fail(path, "expected " + std::to_string(rows) + " rows, found " + std::to_string(v.size()));
    }
    Eigen::MatrixXd out(static_cast<Eigen::Index>(v.size()), cols);
    for (std::size_t r = 0; r < v.size(); ++r) {
      out.row(static_cast<Eigen::Index>(r)) =
          vector(v[r], path + "[" + std::to_string(r) + "]", cols).transpose();
    }
    return out;
  }

 private:
  std::string source_;
};

void check_simplex(const Reader& rd, const Eigen::VectorXd& p, const std::string& path) {
  constexpr double kTol = 1e-9;
  if ((p.array() < 0.0).any()) rd.fail(path, "probabilities must be nonnegative");
  if (std::abs(p.sum() - 1.0) > kTol) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "row sums to " << p.sum() << ", expected 1";
    rd.fail(path, msg.str());
  }
}

Hmm hmm_from_json(const Reader& rd, const json& j, const std::string& path, const ModelMetadata& meta) {
  const int n = meta.n_states;
  const int m = meta.n_mix;
  const int d = meta.dim;
  Hmm model;
  model.initial = rd.vector(rd.field(j, path, "initial"), path + ".initial", n);
  check_simplex(rd, model.initial, path + ".initial");
  model.transitions = rd.matrix(rd.field(j, path, "transitions"), path + ".transitions", n, n);
  for (int s = 0; s < n; ++s) {
    check_simplex(rd, model.transitions.row(s).transpose(), path + ".transitions[" + std::to_string(s) + "]");
  }
  const json& emissions = rd.field(j, path, "emissions");
  if (!emissions.is_array() || static_cast<int>(emissions.size()) != n) {
    rd.fail(path + ".emissions", "expected " + std::to_string(n) + " state emissions");
  }
  for (int s = 0; s < n; ++s) {
    const std::string ep = path + ".emissions[" + std::to_string(s) + "]";
    const json& e = emissions[static_cast<std::size_t>(s)];
    GaussianMixture gmm;
    gmm.weights = rd.vector(rd.field(e, ep, "weights"), ep + ".weights", m);
    check_simplex(rd, gmm.weights, ep + ".weights");
    const Eigen::MatrixXd means = rd.matrix(rd.field(e, ep, "means"), ep + ".means", m, d);
    const json& covs = rd.field(e, ep, "covariances");
    if (!covs.is_array() || static_cast<int>(covs.size()) != m) {
      rd.fail(ep + ".covariances", "expected " + std::to_string(m) + " covariances");
    }
    for (int c = 0; c < m; ++c) {
      const std::string cp = ep + ".covariances[" + std::to_string(c) + "]";
      Eigen::MatrixXd cov;
      if (meta.covariance_type == CovarianceType::Diagonal) {
        cov = rd.vector(covs[static_cast<std::size_t>(c)], cp, d).asDiagonal();
      } else {
        cov = rd.matrix(covs[static_cast<std::size_t>(c)], cp, d, d);
      }
      Gaussian g(means.row(c).transpose(), std::move(cov), meta.covariance_type);
      try {
        g.validate();
      } catch (const ValidationError& err) {
        rd.fail(cp, err.what());
      }
      gmm.components.push_back(std::move(g));
    }
    model.emissions.push_back(std::move(gmm));
  }
  return model;
}

ModelMetadata metadata_of(const H3m& model, std::optional<std::uint64_t> seed) {
  ModelMetadata meta;
  meta.dim = model.dim();
  meta.n_states = model.n_states();
  meta.n_mix = model.n_mix();
  meta.n_components = model.size();
  meta.covariance_type = model.components.empty() ? CovarianceType::Diagonal
                                                  : model.components.front().covariance_type();
  meta.seed = seed;
  return meta;
}

}  // namespace

ModelFile make_model_file(const Hmm& model, std::optional<std::uint64_t> seed) {
  ModelFile file;
  file.kind = ModelKind::Hmm;
  file.model.weights = Eigen::VectorXd::Ones(1);
  file.model.components = {model};
  file.metadata = metadata_of(file.model, seed);
  return file;
}

ModelFile make_model_file(const H3m& model, std::optional<std::uint64_t> seed) {
  ModelFile file;
  file.kind = ModelKind::H3m;
  file.model = model;
  file.metadata = metadata_of(model, seed);
  return file;
}

std::string serialize_model(const ModelFile& file) {
  file.model.validate();
  json doc;
  doc["schema_version"] = file.schema_version;
  doc["kind"] = file.kind == ModelKind::Hmm ? "hmm" : "h3m";
  json meta;
  meta["dim"] = file.metadata.dim;
  meta["n_states"] = file.metadata.n_states;
  meta["n_mix"] = file.metadata.n_mix;
  meta["n_components"] = file.metadata.n_components;
  meta["covariance_type"] = to_string(file.metadata.covariance_type);
  meta["seed"] = file.metadata.seed ? json(*file.metadata.seed) : json(nullptr);
  doc["metadata"] = std::move(meta);
  if (file.kind == ModelKind::Hmm) {
    doc["payload"] = hmm_to_json(file.model.components.front());
  } else {
    json payload;
    payload["weights"] = vector_to_json(file.model.weights);
    json comps = json::array();
    for (const auto& c : file.model.components) comps.push_back(hmm_to_json(c));
    payload["components"] = std::move(comps);
    doc["payload"] = std::move(payload);
  }
  return doc.dump(1) + "\n";
}

ModelFile parse_model(const std::string& text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& err) {
    throw ParseError(source + ": " + err.what());
  }
  const Reader rd(source);
  ModelFile file;
  const json& version = rd.field(doc, "$", "schema_version");
  if (!version.is_string()) rd.fail("$.schema_version", "expected a string");
  file.schema_version = version.get<std::string>();
  if (file.schema_version != kModelSchemaVersion) {
    throw VersionError(source + ": unsupported schema_version '" + file.schema_version +
                       "' (this build reads '" + kModelSchemaVersion + "')");
  }
  const json& kind = rd.field(doc, "$", "kind");
  if (kind == "hmm") {
    file.kind = ModelKind::Hmm;
  } else if (kind == "h3m") {
    file.kind = ModelKind::H3m;
  } else {
    rd.fail("$.kind", "expected \"hmm\" or \"h3m\"");
  }

  const json& meta = rd.field(doc, "$", "metadata");
  file.metadata.dim = rd.integer(rd.field(meta, "$.metadata", "dim"), "$.metadata.dim");
  file.metadata.n_states = rd.integer(rd.field(meta, "$.metadata", "n_states"), "$.metadata.n_states");
  file.metadata.n_mix = rd.integer(rd.field(meta, "$.metadata", "n_mix"), "$.metadata.n_mix");
  file.metadata.n_components =
      rd.integer(rd.field(meta, "$.metadata", "n_components"), "$.metadata.n_components");
  const json& cov_type = rd.field(meta, "$.metadata", "covariance_type");
  if (!cov_type.is_string()) rd.fail("$.metadata.covariance_type", "expected a string");
  try {
    file.metadata.covariance_type = covariance_type_from_string(cov_type.get<std::string>());
  } catch (const ValidationError& err) {
    rd.fail("$.metadata.covariance_type", err.what());
  }
  if (auto it = meta.find("seed"); it != meta.end() && !it->is_null()) {
    if (!it->is_number_unsigned() && !it->is_number_integer()) rd.fail("$.metadata.seed", "expected an integer");
    file.metadata.seed = it->get<std::uint64_t>();
  }
  if (file.metadata.dim < 1 || file.metadata.n_states < 1 || file.metadata.n_mix < 1 ||
      file.metadata.n_components < 1) {
    rd.fail("$.metadata", "dimensions and counts must be >= 1");
  }

  const json& payload = rd.field(doc, "$", "payload");
  if (file.kind == ModelKind::Hmm) {
    if (file.metadata.n_components != 1) rd.fail("$.metadata.n_components", "an hmm file has exactly 1 component");
    file.model.weights = Eigen::VectorXd::Ones(1);
    file.model.components.push_back(hmm_from_json(rd, payload, "$.payload", file.metadata));
  } else {
    const int k = file.metadata.n_components;
    file.model.weights = rd.vector(rd.field(payload, "$.payload", "weights"), "$.payload.weights", k);
    check_simplex(rd, file.model.weights, "$.payload.weights");
    const json& comps = rd.field(payload, "$.payload", "components");
    if (!comps.is_array() || static_cast<int>(comps.size()) != k) {
      rd.fail("$.payload.components", "expected " + std::to_string(k) + " components");
    }
    for (int c = 0; c < k; ++c) {
      file.model.components.push_back(hmm_from_json(rd, comps[static_cast<std::size_t>(c)],
                                                    "$.payload.components[" + std::to_string(c) + "]",
                                                    file.metadata));
    }
  }
  try {
    file.model.validate();
  } catch (const ValidationError& err) {
    throw ParseError(source + ": " + err.what());
  }
  return file;
}

void save_model(const std::filesystem::path& path, const ModelFile& file) {
  const std::string text = serialize_model(file);
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw ValidationError("failed writing '" + path.string() + "'");
}

ModelFile load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open model file '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_model(buffer.str(), path.string());
}

Hmm load_hmm(const std::filesystem::path& path) {
  ModelFile file = load_model(path);
  if (file.model.size() != 1) {
    throw ValidationError(path.string() + ": expected a single HMM, found a mixture of " +
                          std::to_string(file.model.size()));
  }
  return std::move(file.model.components.front());
}

H3m load_h3m(const std::filesystem::path& path) { return load_model(path).model; }

void stream_dataset(std::istream& in, const std::string& source,
                    const std::function<void(Sequence&&, std::size_t)>& sink) {
  std::string line;
  std::size_t line_no = 0;
  int dim = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = source + ":" + std::to_string(line_no);
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& err) {
      throw ParseError(where + ": " + err.what());
    }
    const Reader rd(where);
    Sequence seq;
    const json& id = rd.field(rec, "$", "id");
    seq.id = id.is_string() ? id.get<std::string>() : id.dump();
    const json& obs = rd.field(rec, "$", "obs");
    if (!obs.is_array() || obs.empty()) rd.fail("$.obs", "expected a nonempty array of observation vectors");
    if (!obs.front().is_array() || obs.front().empty()) rd.fail("$.obs[0]", "expected a nonempty array");
    const auto d = static_cast<Eigen::Index>(obs.front().size());
    seq.observations = rd.matrix(obs, "$.obs", -1, d);
    if (dim < 0) dim = static_cast<int>(d);
    if (d != dim) {
      rd.fail("$.obs", "dimension " + std::to_string(d) + " differs from earlier records (" +
                           std::to_string(dim) + ")");
    }
    if (auto it = rec.find("label"); it != rec.end() && !it->is_null()) {
      seq.label = it->is_string() ? it->get<std::string>() : it->dump();
    }
    sink(std::move(seq), line_no);
  }
}

std::vector<Sequence> parse_dataset(std::istream& in, const std::string& source) {
  std::vector<Sequence> out;
  stream_dataset(in, source, [&](Sequence&& s, std::size_t) { out.push_back(std::move(s)); });
  return out;
}

std::vector<Sequence> load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open dataset '" + path.string() + "'");
  return parse_dataset(in, path.string());
}

void write_dataset(std::ostream& out, const std::vector<Sequence>& data) {
  for (const auto& s : data) {
    json rec;
    rec["id"] = s.id;
    rec["obs"] = matrix_to_json(s.observations);
    if (s.label) rec["label"] = *s.label;
    out << rec.dump() << '\n';
  }
}

void save_dataset(const std::filesystem::path& path, const std::vector<Sequence>& data) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open '" + path.string() + "' for writing");
  write_dataset(out, data);
}

}  // namespace vhem

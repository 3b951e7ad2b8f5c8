// Apache License, Version 2.0, refer to LICENSE.txt

#include "assemblage/serialize.hpp"

#include "assemblage/error.hpp"
#include "assemblage/evaluate.hpp"
#include "assemblage/hash.hpp"
#include "assemblage/random.hpp"

namespace assemblage {

using nlohmann::json;

namespace {

template <class T>
json matrix_json(const Matrix<T>& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r)
    rows.push_back(std::vector<T>(m.row(r).begin(), m.row(r).end()));
  return rows;
}

template <class T>
Matrix<T> matrix_from(const json& rows, std::size_t cols_hint = 0) {
  Matrix<T> m;
  if (!rows.is_array()) throw DataError("expected a matrix (array of rows)");
  for (const auto& row : rows) {
    auto v = row.get<std::vector<T>>();
    if (m.rows() > 0 && v.size() != m.cols())
      throw DataError("matrix rows have different lengths");
    m.append_row(v);
  }
  if (m.rows() == 0 && cols_hint > 0) m = Matrix<T>(0, cols_hint);
  return m;
}

void check_version(const json& doc, std::string_view kind) {
  if (!doc.is_object()) throw DataError("expected a JSON object");
  if (doc.value("format_version", -1) != kFormatVersion)
    throw DataError("unsupported format_version");
  if (doc.value("kind", std::string()) != kind)
    throw DataError("expected a document of kind " + std::string(kind));
}

json header(std::string_view kind) {
  return json{{"format_version", kFormatVersion}, {"kind", std::string(kind)}};
}

}  // namespace

PredictiveModel TrainedModel::predictive() const {
  switch (family) {
    case Family::simple:
      return PredictiveModel::simple(std::get<SimpleModel>(params));
    case Family::cond_simple:
      return PredictiveModel::cond_simple(std::get<CondSimpleModel>(params));
    case Family::fg:
    case Family::cfg: {
      const auto& t = std::get<TopicModelCounts>(params);
      auto phi = smoothed_phi(t.group_type, t.group_totals, t.hyper.beta());
      if (family == Family::cfg) {
        if (!t.priors) throw DataError("cfg model without room-type priors");
        return PredictiveModel::cfg(std::move(phi), *t.priors);
      }
      return PredictiveModel::fg(std::move(phi), t.hyper.alpha());
    }
  }
  throw DataError("unknown model family");
}

TrainedModel trained_simple(SimpleModel model) {
  return {Family::simple, std::move(model)};
}

TrainedModel trained_cond(CondSimpleModel model) {
  return {Family::cond_simple, std::move(model)};
}

TrainedModel trained_fg(const Snapshot& s) {
  return {Family::fg, TopicModelCounts{s.iteration, s.hyper, s.group_type,
                                       s.group_totals, std::nullopt}};
}

TrainedModel trained_cfg(const Snapshot& s, RoomTypePriors priors) {
  return {Family::cfg, TopicModelCounts{s.iteration, s.hyper, s.group_type,
                                        s.group_totals, std::move(priors)}};
}

json to_json(const Hyperparams& hyper) {
  return json{{"alpha", hyper.alpha()}, {"beta", hyper.beta()}};
}

Hyperparams hyperparams_from_json(const json& doc) {
  try {
    return Hyperparams(doc.at("alpha").get<std::vector<double>>(),
                       doc.at("beta").get<double>());
  } catch (const ConfigError& e) {
    throw DataError(std::string("invalid hyperparameters: ") + e.what());
  }
}

json to_json(const RoomTypePriors& priors) {
  std::vector<bool> flags(priors.fallback.begin(), priors.fallback.end());
  return json{{"k", priors.k()},
              {"global_alpha", priors.global_alpha},
              {"alpha_by_type", matrix_json(priors.alpha_by_type)},
              {"fallback", flags}};
}

RoomTypePriors room_type_priors_from_json(const json& doc) {
  RoomTypePriors p;
  p.global_alpha = doc.at("global_alpha").get<std::vector<double>>();
  p.alpha_by_type = matrix_from<double>(doc.at("alpha_by_type"));
  auto flags = doc.at("fallback").get<std::vector<bool>>();
  p.fallback.assign(flags.begin(), flags.end());
  if (p.alpha_by_type.rows() != kRoomTypeCount ||
      p.fallback.size() != kRoomTypeCount ||
      p.alpha_by_type.cols() != p.global_alpha.size() ||
      doc.at("k").get<std::size_t>() != p.global_alpha.size())
    throw DataError("room-type priors have inconsistent dimensions");
  for (double a : p.alpha_by_type.data())
    if (!(a > 0.0)) throw DataError("room-type prior entries must be positive");
  return p;
}

json to_json(const TrainedModel& model) {
  json doc = header("trained_model");
  doc["family"] = std::string(family_name(model.family));
  switch (model.family) {
    case Family::simple: {
      const auto& m = std::get<SimpleModel>(model.params);
      doc["eta"] = m.eta();
      doc["vocab_size"] = m.vocab_size();
      doc["counts"] = m.counts();
      break;
    }
    case Family::cond_simple: {
      const auto& m = std::get<CondSimpleModel>(model.params);
      doc["eta"] = m.eta();
      doc["vocab_size"] = m.vocab_size();
      doc["room_types"] = kRoomTypeCount;
      // Row-major room_type x artifact_type.
      doc["counts"] = m.counts_by_type().data();
      break;
    }
    case Family::fg:
    case Family::cfg: {
      const auto& t = std::get<TopicModelCounts>(model.params);
      doc["vocab_size"] = t.group_type.cols();
      doc["k"] = t.hyper.k();
      doc["iteration"] = t.iteration;
      doc["hyperparams"] = to_json(t.hyper);
      doc["group_type_counts"] = matrix_json(t.group_type);
      doc["group_totals"] = t.group_totals;
      if (t.priors) doc["room_type_priors"] = to_json(*t.priors);
      break;
    }
  }
  return doc;
}

TrainedModel trained_model_from_json(const json& doc) {
  try {
    check_version(doc, "trained_model");
    auto family = parse_family(doc.at("family").get<std::string>());
    if (!family) throw DataError("unknown model family");
    const auto vocab = doc.at("vocab_size").get<std::size_t>();
    switch (*family) {
      case Family::simple: {
        auto counts = doc.at("counts").get<std::vector<std::int64_t>>();
        if (counts.size() != vocab) throw DataError("counts length != vocab_size");
        return trained_simple(SimpleModel(std::move(counts), doc.at("eta")));
      }
      case Family::cond_simple: {
        auto flat = doc.at("counts").get<std::vector<std::int64_t>>();
        if (flat.size() != vocab * kRoomTypeCount)
          throw DataError("counts length != room_types * vocab_size");
        Matrix<std::int64_t> m(kRoomTypeCount, vocab);
        m.data() = std::move(flat);
        return trained_cond(CondSimpleModel(std::move(m), doc.at("eta")));
      }
      case Family::fg:
      case Family::cfg: {
        TopicModelCounts t;
        t.iteration = doc.at("iteration").get<std::uint64_t>();
        t.hyper = hyperparams_from_json(doc.at("hyperparams"));
        t.group_type = matrix_from<int>(doc.at("group_type_counts"));
        t.group_totals = doc.at("group_totals").get<std::vector<int>>();
        if (t.group_type.rows() != t.hyper.k() ||
            t.group_type.cols() != vocab ||
            t.group_totals.size() != t.hyper.k())
          throw DataError("topic counts have inconsistent dimensions");
        for (std::size_t k = 0; k < t.hyper.k(); ++k) {
          long long s = 0;
          for (int c : t.group_type.row(k)) s += c;
          if (s != t.group_totals[k])
            throw DataError("group_totals disagree with group_type_counts");
        }
        if (*family == Family::cfg) {
          t.priors = room_type_priors_from_json(doc.at("room_type_priors"));
          if (t.priors->k() != t.hyper.k())
            throw DataError("room-type priors and hyperparameters disagree on K");
        }
        return {*family, std::move(t)};
      }
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed model file: ") + e.what());
  } catch (const ConfigError& e) {
    throw DataError(std::string("invalid model file: ") + e.what());
  }
  throw DataError("unknown model family");
}

json chain_to_json(const ChainResult& chain, const ChainConfig& config,
                   std::uint64_t corpus_hash) {
  json doc = header("gibbs_chain");
  doc["corpus_hash"] = to_hex(corpus_hash);
  doc["rng"] = json{{"algorithm", std::string(Rng::kAlgorithm)},
                    {"seed", config.seed}};
  doc["config"] = json{{"k", config.k},
                       {"seed", config.seed},
                       {"iterations", config.iterations},
                       {"save_every", config.save_every},
                       {"burn_in", config.burn_in},
                       {"optimize_every", config.optimize_every},
                       {"alpha_total", config.alpha_total},
                       {"beta", config.beta},
                       {"optimize_passes", config.optimize_passes}};
  json snaps = json::array();
  for (const auto& s : chain.snapshots)
    snaps.push_back(json{{"iteration", s.iteration},
                         {"hyperparams", to_json(s.hyper)},
                         {"group_totals", s.group_totals},
                         {"z", s.z}});
  doc["snapshots"] = std::move(snaps);
  return doc;
}

LoadedChain chain_from_json(const json& doc, const CorpusView& train) {
  try {
    check_version(doc, "gibbs_chain");
    LoadedChain out;
    const auto& c = doc.at("config");
    out.config.k = c.at("k");
    out.config.seed = c.at("seed");
    out.config.iterations = c.at("iterations");
    out.config.save_every = c.at("save_every");
    out.config.burn_in = c.at("burn_in");
    out.config.optimize_every = c.at("optimize_every");
    out.config.alpha_total = c.at("alpha_total");
    out.config.beta = c.at("beta");
    out.config.optimize_passes = c.at("optimize_passes");
    out.corpus_hash = std::stoull(doc.at("corpus_hash").get<std::string>(),
                                  nullptr, 16);
    auto data = TrainingData::from(train);
    for (const auto& s : doc.at("snapshots")) {
      auto hyper = hyperparams_from_json(s.at("hyperparams"));
      if (hyper.k() != out.config.k)
        throw DataError("snapshot K differs from the chain config");
      auto snap = snapshot_from_assignments(
          *data, s.at("z").get<std::vector<std::vector<int>>>(), hyper,
          s.at("iteration").get<std::uint64_t>());
      if (snap.group_totals != s.at("group_totals").get<std::vector<int>>())
        throw DataError("snapshot at iteration " +
                        std::to_string(snap.iteration) +
                        " fails the group_totals check");
      out.snapshots.push_back(std::move(snap));
    }
    if (out.snapshots.empty()) throw DataError("chain file has no snapshots");
    return out;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed chain file: ") + e.what());
  } catch (const std::invalid_argument&) {
    throw DataError("malformed corpus_hash in chain file");
  }
}

json to_json(const GroundTruth& truth, const Vocabulary& vocab) {
  json doc = header("synth_truth");
  doc["labels"] = vocab.labels();
  doc["phi"] = matrix_json(truth.phi);
  doc["alpha"] = matrix_json(truth.alpha);
  doc["room_types"] = truth.room_types;
  doc["theta"] = matrix_json(truth.theta);
  doc["z"] = truth.z;
  return doc;
}

}  // namespace assemblage

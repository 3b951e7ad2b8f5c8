// Apache License, Version 2.0, refer to LICENSE.txt

#include "assemblage/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "assemblage/analysis.hpp"
#include "assemblage/baseline.hpp"
#include "assemblage/corpus.hpp"
#include "assemblage/error.hpp"
#include "assemblage/evaluate.hpp"
#include "assemblage/hash.hpp"
#include "assemblage/priors.hpp"
#include "assemblage/sampler.hpp"
#include "assemblage/serialize.hpp"
#include "assemblage/synth.hpp"
#include "csv.hpp"

namespace assemblage::cli {

using nlohmann::json;

namespace {

class UsageError : public Error {
 public:
  using Error::Error;
};

enum class Kind { uint, integer, real, text, flag, uint_list, real_list, text_list };
enum class Role { parameter, path, runtime };

struct Param {
  std::string name;
  Kind kind;
  json fallback;  // null: unset unless required
  std::string help;
  Role role = Role::parameter;
  bool required = false;
};

std::string flag_name(const std::string& name) {
  std::string f = "--" + name;
  for (auto& c : f)
    if (c == '_') c = '-';
  return f;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::uint64_t to_uint(const std::string& s, const std::string& flag) {
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
    throw UsageError(flag + ": expected a non-negative integer, got '" + s + "'");
  try {
    return std::stoull(s);
  } catch (const std::exception&) {
    throw UsageError(flag + ": integer out of range: '" + s + "'");
  }
}

std::int64_t to_int(const std::string& s, const std::string& flag) {
  std::size_t used = 0;
  try {
    auto v = std::stoll(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw UsageError(flag + ": expected an integer, got '" + s + "'");
}

double to_real(const std::string& s, const std::string& flag) {
  std::size_t used = 0;
  try {
    double v = std::stod(s, &used);
    if (used == s.size() && std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  throw UsageError(flag + ": expected a finite number, got '" + s + "'");
}

json from_text(const Param& p, const std::string& s) {
  const auto flag = flag_name(p.name);
  switch (p.kind) {
    case Kind::uint: return to_uint(s, flag);
    case Kind::integer: return to_int(s, flag);
    case Kind::real: return to_real(s, flag);
    case Kind::text: return s;
    case Kind::flag: return true;
    case Kind::uint_list: {
      json a = json::array();
      for (const auto& item : split_list(s)) a.push_back(to_uint(item, flag));
      return a;
    }
    case Kind::real_list: {
      json a = json::array();
      for (const auto& item : split_list(s)) a.push_back(to_real(item, flag));
      return a;
    }
    case Kind::text_list: {
      json a = json::array();
      for (const auto& item : split_list(s)) a.push_back(item);
      return a;
    }
  }
  return nullptr;
}

// Checks a config-file value against the parameter kind and normalizes
// numbers so that 1 and 1.0 hash alike.
json from_config(const Param& p, const json& v) {
  const std::string where = "config key '" + p.name + "'";
  auto as_uint = [&](const json& x) -> json {
    if (x.is_number_unsigned()) return x.get<std::uint64_t>();
    if (x.is_number_integer() && x.get<std::int64_t>() >= 0)
      return static_cast<std::uint64_t>(x.get<std::int64_t>());
    throw UsageError(where + ": expected a non-negative integer");
  };
  auto as_real = [&](const json& x) -> json {
    if (!x.is_number() || !std::isfinite(x.get<double>()))
      throw UsageError(where + ": expected a finite number");
    return x.get<double>();
  };
  auto as_list = [&](const json& x, auto&& each) -> json {
    json a = json::array();
    if (x.is_array()) {
      for (const auto& item : x) a.push_back(each(item));
    } else {
      a.push_back(each(x));
    }
    return a;
  };
  auto as_text = [&](const json& x) -> json {
    if (!x.is_string()) throw UsageError(where + ": expected a string");
    return x;
  };
  switch (p.kind) {
    case Kind::uint: return as_uint(v);
    case Kind::integer:
      if (!v.is_number_integer()) throw UsageError(where + ": expected an integer");
      return v.get<std::int64_t>();
    case Kind::real: return as_real(v);
    case Kind::text: return as_text(v);
    case Kind::flag:
      if (!v.is_boolean()) throw UsageError(where + ": expected true or false");
      return v;
    case Kind::uint_list: return as_list(v, as_uint);
    case Kind::real_list: return as_list(v, as_real);
    case Kind::text_list:
      if (v.is_string()) return from_text(p, v.get<std::string>());
      return as_list(v, as_text);
  }
  return nullptr;
}

struct Command {
  Command(std::string n, std::string h, std::vector<Param> ps)
      : name(std::move(n)), help(std::move(h)), params(std::move(ps)) {}

  std::string name;
  std::string help;
  std::vector<Param> params;
  CLI::App* app = nullptr;
  std::map<std::string, std::string> text;
  std::map<std::string, bool> flags;
  std::string config_path;
};

const Param& find_param(const Command& c, const std::string& name) {
  for (const auto& p : c.params)
    if (p.name == name) return p;
  throw UsageError("unknown parameter " + name);
}

// Defaults, then the config file, then explicit flags.
RunConfig resolve(const Command& c) {
  RunConfig rc;
  rc.command = c.name;
  std::map<std::string, json> values;
  for (const auto& p : c.params)
    if (!p.fallback.is_null()) values[p.name] = p.fallback;

  if (!c.config_path.empty()) {
    std::ifstream in(c.config_path, std::ios::binary);
    if (!in) throw UsageError("--config: cannot read " + c.config_path);
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::exception& e) {
      throw UsageError("--config: invalid JSON: " + std::string(e.what()));
    }
    if (!doc.is_object()) throw UsageError("--config: expected a JSON object");
    json merged = json::object();
    if (doc.contains("parameters")) {
      if (doc.contains("command") && doc["command"] != c.name)
        throw UsageError("--config: file was written for '" +
                         doc["command"].get<std::string>() + "'");
      merged.update(doc["parameters"]);
      if (doc.contains("paths")) merged.update(doc["paths"]);
      const bool takes_workers = std::any_of(
          c.params.begin(), c.params.end(),
          [](const Param& p) { return p.role == Role::runtime; });
      if (takes_workers && doc.contains("workers"))
        merged["workers"] = doc["workers"];
    } else {
      merged = doc;
    }
    for (const auto& [key, v] : merged.items()) {
      bool known = false;
      for (const auto& p : c.params) known = known || p.name == key;
      if (!known) throw UsageError("--config: unknown key '" + key + "'");
      if (v.is_null()) continue;
      values[key] = from_config(find_param(c, key), v);
    }
  }

  for (const auto& p : c.params) {
    const auto* opt = c.app->get_option_no_throw(flag_name(p.name));
    if (opt == nullptr || opt->count() == 0) continue;
    values[p.name] = p.kind == Kind::flag ? json(c.flags.at(p.name))
                                          : from_text(p, c.text.at(p.name));
  }

  for (const auto& p : c.params) {
    auto it = values.find(p.name);
    if (it == values.end()) {
      if (p.required) throw UsageError(flag_name(p.name) + " is required");
      continue;
    }
    switch (p.role) {
      case Role::parameter: rc.parameters[p.name] = it->second; break;
      case Role::path: rc.paths[p.name] = it->second; break;
      case Role::runtime: rc.workers = it->second.get<std::size_t>(); break;
    }
  }
  return rc;
}

std::string default_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (!v.is_array()) return v.dump();
  std::string out;
  for (const auto& e : v) {
    if (!out.empty()) out += ',';
    out += e.is_string() ? e.get<std::string>() : e.dump();
  }
  return out;
}

std::string type_name(Kind kind) {
  switch (kind) {
    case Kind::uint: return "UINT";
    case Kind::integer: return "INT";
    case Kind::real: return "REAL";
    case Kind::text: return "TEXT";
    case Kind::flag: return "";
    case Kind::uint_list: return "UINT,...";
    case Kind::real_list: return "REAL,...";
    case Kind::text_list: return "TEXT,...";
  }
  return "TEXT";
}

void register_command(CLI::App& root, Command& c) {
  c.app = root.add_subcommand(c.name, c.help);
  c.app->add_option("--config", c.config_path,
                    "JSON file of parameters; flags take precedence");
  for (const auto& p : c.params) {
    std::string help = p.help;
    if (!p.fallback.is_null()) help += " [default: " + default_text(p.fallback) + "]";
    if (p.required) help += " (required)";
    if (p.kind == Kind::flag) {
      c.flags[p.name] = false;
      c.app->add_flag(flag_name(p.name), c.flags[p.name], help);
    } else {
      c.text[p.name];
      c.app->add_option(flag_name(p.name), c.text[p.name], help)
          ->type_name(type_name(p.kind));
    }
  }
}

// ---- parameter accessors

const json& need(const RunConfig& rc, const std::string& name) {
  if (rc.parameters.contains(name)) return rc.parameters[name];
  if (rc.paths.contains(name)) return rc.paths[name];
  throw UsageError(flag_name(name) + " is required");
}

bool has(const RunConfig& rc, const std::string& name) {
  return rc.parameters.contains(name) || rc.paths.contains(name);
}

std::size_t get_size(const RunConfig& rc, const std::string& name) {
  return need(rc, name).get<std::size_t>();
}

double get_real(const RunConfig& rc, const std::string& name) {
  return need(rc, name).get<double>();
}

std::string get_text(const RunConfig& rc, const std::string& name) {
  return need(rc, name).get<std::string>();
}

// ---- files

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("failed writing " + path.string());
}

std::filesystem::path output_dir(const RunConfig& rc) {
  std::filesystem::path dir(get_text(rc, "out"));
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError("cannot create " + dir.string() + ": " + ec.message());
  return dir;
}

// Writes to --output when given, otherwise to `out`.
void emit(const RunConfig& rc, const std::string& key, std::string_view text,
          std::ostream& out) {
  if (has(rc, key)) {
    write_file(get_text(rc, key), text);
  } else {
    out << text;
  }
}

std::string dump(const json& doc) { return doc.dump(2) + "\n"; }

Corpus load_corpus(const RunConfig& rc) {
  return parse_records(read_file(get_text(rc, "corpus")));
}

std::map<int, std::string> load_labels(const RunConfig& rc) {
  if (!has(rc, "room_types")) return {};
  return parse_room_type_labels(read_file(get_text(rc, "room_types")));
}

json provenance(const RunConfig& rc, std::uint64_t corpus_hash) {
  return json{{"format_version", kFormatVersion},
              {"config_hash", to_hex(rc.hash())},
              {"corpus_hash", to_hex(corpus_hash)}};
}

std::string csv_header(const RunConfig& rc, std::uint64_t corpus_hash) {
  return "# format_version=" + std::to_string(kFormatVersion) +
         " config_hash=" + to_hex(rc.hash()) +
         " corpus_hash=" + to_hex(corpus_hash) + "\n";
}

void write_config(const std::filesystem::path& dir, const RunConfig& rc,
                  std::uint64_t corpus_hash) {
  json doc = rc.to_json();
  doc["corpus_hash"] = to_hex(corpus_hash);
  write_file(dir / "config.json", dump(doc));
}

ChainConfig chain_config(const RunConfig& rc) {
  ChainConfig c;
  if (has(rc, "k")) {
    const auto& k = need(rc, "k");
    c.k = k.is_array() ? (k.empty() ? 0 : k[0].get<std::size_t>())
                       : k.get<std::size_t>();
  }
  if (has(rc, "seed")) c.seed = need(rc, "seed").get<std::uint64_t>();
  c.iterations = get_size(rc, "iterations");
  c.save_every = get_size(rc, "save_every");
  c.burn_in = get_size(rc, "burn_in");
  c.optimize_every = get_size(rc, "optimize_every");
  c.alpha_total = get_real(rc, "alpha_total");
  c.beta = get_real(rc, "beta");
  c.optimize_passes = get_size(rc, "optimize_passes");
  if (c.burn_in >= c.iterations)
    throw UsageError("--burn-in (" + std::to_string(c.burn_in) +
                     ") must be less than --iterations (" +
                     std::to_string(c.iterations) + ")");
  return c;
}

std::vector<Param> chain_params() {
  return {
      {"iterations", Kind::uint, 2000, "Gibbs sweeps per chain"},
      {"save_every", Kind::uint, 100, "snapshot interval after burn-in"},
      {"burn_in", Kind::uint, 500, "sweeps before snapshots and optimization"},
      {"optimize_every", Kind::uint, 50, "hyperparameter optimization interval"},
      {"optimize_passes", Kind::uint, 20, "fixed-point passes per optimization"},
      {"alpha_total", Kind::real, 50.0, "initial sum of the symmetric alpha"},
      {"beta", Kind::real, 0.01, "initial beta"},
  };
}

Param corpus_param() {
  return {"corpus", Kind::text, nullptr, "corpus CSV", Role::path, true};
}

Param labels_param() {
  return {"room_types", Kind::text, nullptr, "room_type,label CSV", Role::path};
}

// ---- validate

int cmd_validate(const RunConfig& rc, std::ostream& out) {
  const auto corpus = load_corpus(rc);
  const auto labels = load_labels(rc);
  const auto s = summarize(corpus);
  const auto hash = content_hash(corpus);

  json doc = provenance(rc, hash);
  doc["kind"] = "corpus_summary";
  doc["houses"] = json::array();
  for (const auto& h : s.houses)
    doc["houses"].push_back(json{{"house_id", h.id}, {"name", h.name},
                                 {"rooms", h.rooms}, {"objects", h.tokens}});
  doc["room_types"] = json::array();
  for (int t = 0; t < kRoomTypeCount; ++t) {
    if (s.room_type_counts[t] == 0) continue;
    json row{{"room_type", t}, {"rooms", s.room_type_counts[t]}};
    if (auto it = labels.find(t); it != labels.end()) row["label"] = it->second;
    doc["room_types"].push_back(row);
  }
  doc["house_count"] = s.houses.size();
  doc["rooms"] = s.rooms;
  doc["objects"] = s.tokens;
  doc["empty_rooms"] = s.empty_rooms;
  doc["artifact_types"] = s.vocab_size;
  emit(rc, "output", dump(doc), out);
  return kOk;
}

// ---- train

int cmd_train(const RunConfig& rc, std::ostream& out) {
  const auto family = parse_family(get_text(rc, "family"));
  if (!family) throw UsageError("--family: expected simple, cond, fg or cfg");
  const auto corpus = load_corpus(rc);
  const auto hash = content_hash(corpus);
  const auto dir = output_dir(rc);

  json model;
  if (*family == Family::simple) {
    model = to_json(trained_simple(fit_simple(corpus, get_real(rc, "eta"))));
  } else if (*family == Family::cond_simple) {
    model = to_json(trained_cond(fit_cond(corpus, get_real(rc, "eta"))));
  } else {
    const auto config = chain_config(rc);
    const auto chain = run_chain(corpus, config);
    json state = chain_to_json(chain, config, hash);
    state.update(provenance(rc, hash));
    write_file(dir / "chain.json", dump(state));
    const auto& last = chain.snapshots.back();
    if (*family == Family::fg) {
      model = to_json(trained_fg(last));
    } else {
      model = to_json(trained_cfg(
          last, fit_room_type_priors(chain.snapshots, corpus, config.k)));
    }
  }
  model.update(provenance(rc, hash));
  write_file(dir / "model.json", dump(model));
  write_config(dir, rc, hash);
  out << "trained " << family_name(*family) << " model in " << dir.string()
      << "\n";
  return kOk;
}

// ---- eval

int cmd_eval(const RunConfig& rc, std::ostream& out, std::ostream& err) {
  EvalConfig config;
  config.families.clear();
  for (const auto& name : need(rc, "families")) {
    auto f = parse_family(name.get<std::string>());
    if (!f)
      throw UsageError("--families: unknown family '" +
                       name.get<std::string>() + "'");
    config.families.push_back(*f);
  }
  config.k_grid = need(rc, "k").get<std::vector<std::size_t>>();
  config.seeds = get_size(rc, "seeds");
  config.root_seed = need(rc, "seed").get<std::uint64_t>();
  config.eta = get_real(rc, "eta");
  config.chain = chain_config(rc);
  config.particles = get_size(rc, "particles");
  config.prefer_exact = need(rc, "exact").get<bool>();
  auto phi_mode = parse_phi_mode(get_text(rc, "phi_mode"));
  if (!phi_mode) throw UsageError("--phi-mode: expected last or average");
  config.phi_mode = *phi_mode;
  config.workers = rc.workers;

  AggregateOptions agg;
  const auto averaging = get_text(rc, "k_averaging");
  if (averaging == "perplexity") {
    agg.averaging = KAveraging::perplexity;
  } else if (averaging == "log_prob") {
    agg.averaging = KAveraging::log_prob;
  } else {
    throw UsageError("--k-averaging: expected perplexity or log_prob");
  }
  if (has(rc, "k_select")) agg.k = get_size(rc, "k_select");
  config.validate();

  const auto corpus = load_corpus(rc);
  const auto dir = output_dir(rc);
  auto table = run_loo(corpus, config);
  // CSV headers carry the run hash rather than the evaluation-only one.
  table.config_hash = rc.hash();

  write_file(dir / "eval_table.csv", eval_table_csv(table));
  struct Grouping {
    GroupBy by;
    std::string_view file;
    std::string_view column;
  };
  const Grouping groupings[] = {
      {GroupBy::house, "summary_house.csv", "house_id"},
      {GroupBy::room_type, "summary_room_type.csv", "room_type"},
      {GroupBy::k, "summary_k.csv", "k"}};
  for (const auto& g : groupings) {
    auto options = agg;
    options.by = g.by;
    if (g.by == GroupBy::k) options.k.reset();
    write_file(dir / g.file,
               summary_csv(aggregate(table, options), table, g.column));
  }
  auto house = agg;
  house.by = GroupBy::house;
  write_file(dir / "ttest.csv",
             ttest_csv(pairwise_house_tests(table, house), table));
  write_config(dir, rc, table.corpus_hash);

  if (table.skipped_empty_rooms > 0)
    err << "note: " << table.skipped_empty_rooms
        << " held-out rooms with no objects were excluded\n";
  out << "wrote " << table.records.size() << " records to " << dir.string()
      << "\n";
  return kOk;
}

// ---- analysis

struct LoadedAnalysis {
  Corpus corpus;
  LoadedChain chain;
  std::uint64_t corpus_hash = 0;
  std::uint64_t chain_hash = 0;
};

LoadedAnalysis load_analysis(const RunConfig& rc) {
  LoadedAnalysis a;
  a.corpus = load_corpus(rc);
  a.corpus_hash = content_hash(a.corpus);
  const auto text = read_file(get_text(rc, "chain"));
  a.chain_hash = fnv1a(text);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError("chain file is not valid JSON: " + std::string(e.what()));
  }
  a.chain = chain_from_json(doc, a.corpus);
  if (a.chain.corpus_hash != a.corpus_hash)
    throw DataError("chain was trained on a different corpus (corpus_hash " +
                    to_hex(a.chain.corpus_hash) + ", expected " +
                    to_hex(a.corpus_hash) + ")");
  return a;
}

json analysis_header(const RunConfig& rc, const LoadedAnalysis& a,
                     std::string_view kind) {
  json doc = provenance(rc, a.corpus_hash);
  doc["kind"] = std::string(kind);
  json iterations = json::array();
  for (const auto& s : a.chain.snapshots) iterations.push_back(s.iteration);
  doc["snapshots"] = json{{"chain_hash", to_hex(a.chain_hash)},
                          {"k", a.chain.config.k},
                          {"iterations", iterations}};
  return doc;
}

TypeId lookup(const Vocabulary& vocab, const std::string& label,
              const std::string& flag) {
  auto id = vocab.find(label);
  if (!id) throw UsageError(flag + ": unknown artifact type '" + label + "'");
  return *id;
}

void emit_csv(const RunConfig& rc, const LoadedAnalysis& a,
              const std::string& body) {
  if (has(rc, "csv"))
    write_file(get_text(rc, "csv"), csv_header(rc, a.corpus_hash) + body);
}

int cmd_cooccur(const RunConfig& rc, std::ostream& out) {
  const auto a = load_analysis(rc);
  const auto& vocab = a.corpus.vocabulary();
  const auto anchor = lookup(vocab, get_text(rc, "anchor"), "--anchor");
  AnalysisOptions options{need(rc, "smooth").get<bool>()};
  const auto& snaps = a.chain.snapshots;

  json doc = analysis_header(rc, a, "cooccurrence");
  doc["anchor"] = vocab.label(anchor);
  doc["smoothed"] = options.smooth;
  std::ostringstream body;
  body << "anchor,rank,artifact_type,probability\n";
  if (has(rc, "with")) {
    const auto other = lookup(vocab, get_text(rc, "with"), "--with");
    const auto c = cooccurrence(snaps, anchor, other, options);
    doc["with"] = vocab.label(other);
    doc["probability"] = c.probability;
    doc["zero_support"] = c.zero_support;
    body << csv::escape(vocab.label(anchor)) << ",1,"
         << csv::escape(vocab.label(other)) << ","
         << csv::format_double(c.probability) << "\n";
  } else {
    const auto ranking =
        cooccurrence_ranking(snaps, anchor, get_size(rc, "top"), options);
    doc["zero_support"] = ranking.zero_support;
    doc["ranking"] = json::array();
    std::size_t rank = 0;
    for (const auto& item : ranking.items) {
      doc["ranking"].push_back(json{{"artifact_type", vocab.label(item.type)},
                                    {"probability", item.probability}});
      body << csv::escape(vocab.label(anchor)) << "," << ++rank << ","
           << csv::escape(vocab.label(item.type)) << ","
           << csv::format_double(item.probability) << "\n";
    }
  }
  emit_csv(rc, a, body.str());
  emit(rc, "output", dump(doc), out);
  return kOk;
}

int cmd_topics(const RunConfig& rc, std::ostream& out) {
  const auto a = load_analysis(rc);
  const auto& vocab = a.corpus.vocabulary();
  AnalysisOptions options{need(rc, "smooth").get<bool>()};
  const auto groups =
      group_summaries(a.chain.snapshots, get_size(rc, "top"), options);

  json doc = analysis_header(rc, a, "functional_groups");
  doc["smoothed"] = options.smooth;
  doc["groups"] = json::array();
  std::ostringstream body;
  body << "group,group_probability,rank,artifact_type,probability\n";
  for (const auto& g : groups) {
    json top = json::array();
    std::size_t rank = 0;
    for (const auto& item : g.top) {
      top.push_back(json{{"artifact_type", vocab.label(item.type)},
                         {"probability", item.probability}});
      body << g.group << "," << csv::format_double(g.probability) << ","
           << ++rank << "," << csv::escape(vocab.label(item.type)) << ","
           << csv::format_double(item.probability) << "\n";
    }
    doc["groups"].push_back(
        json{{"group", g.group}, {"probability", g.probability}, {"top", top}});
  }
  emit_csv(rc, a, body.str());
  emit(rc, "output", dump(doc), out);
  return kOk;
}

int cmd_profile(const RunConfig& rc, std::ostream& out) {
  const auto a = load_analysis(rc);
  const auto labels = load_labels(rc);
  std::vector<int> types;
  if (has(rc, "room_type")) {
    const auto t = need(rc, "room_type").get<std::int64_t>();
    if (t < 0 || t >= kRoomTypeCount)
      throw UsageError("--room-type: expected 0..22");
    types.push_back(static_cast<int>(t));
  } else {
    const auto s = summarize(a.corpus);
    for (int t = 0; t < kRoomTypeCount; ++t)
      if (s.room_type_counts[t] > 0) types.push_back(t);
  }

  json doc = analysis_header(rc, a, "room_type_profiles");
  doc["profiles"] = json::array();
  std::ostringstream body;
  body << "room_type,label,group,probability\n";
  for (int t : types) {
    std::vector<double> profile;
    try {
      profile = room_type_profile(a.chain.snapshots, a.corpus, t);
    } catch (const DataError&) {
      if (types.size() == 1) throw;
      continue;  // rooms of this type hold no objects
    }
    const auto it = labels.find(t);
    const std::string label = it == labels.end() ? "" : it->second;
    json row{{"room_type", t}, {"distribution", profile}};
    if (!label.empty()) row["label"] = label;
    doc["profiles"].push_back(row);
    for (std::size_t k = 0; k < profile.size(); ++k)
      body << t << "," << csv::escape(label) << "," << k << ","
           << csv::format_double(profile[k]) << "\n";
  }
  emit_csv(rc, a, body.str());
  emit(rc, "output", dump(doc), out);
  return kOk;
}

// ---- synth

int cmd_synth(const RunConfig& rc, std::ostream& out) {
  SynthSpec spec;
  const auto k = get_size(rc, "k");
  const auto vocab = get_size(rc, "vocab");
  const auto mass = get_real(rc, "mass");
  const auto shape = get_text(rc, "phi");
  if (k == 0 || vocab == 0) throw UsageError("--k and --vocab must be positive");
  if (shape == "dominant") {
    spec.phi = dominant_phi(k, vocab, mass);
  } else if (shape == "block") {
    spec.phi = block_phi(k, vocab, mass);
  } else {
    throw UsageError("--phi: expected dominant or block");
  }
  spec.room_types.clear();
  for (auto t : need(rc, "types").get<std::vector<std::size_t>>())
    spec.room_types.push_back(static_cast<int>(t));
  const auto alpha = need(rc, "alpha").get<std::vector<double>>();
  if (alpha.size() == 1) {
    spec.alpha = Matrix<double>(1, k);
    for (std::size_t i = 0; i < k; ++i) spec.alpha(0, i) = alpha[0];
  } else if (alpha.size() == k || alpha.size() == k * spec.room_types.size()) {
    spec.alpha = Matrix<double>(alpha.size() / k, k);
    spec.alpha.data() = alpha;
  } else {
    throw UsageError("--alpha: expected 1, K, or K x (number of --types) values");
  }
  const auto rule = get_text(rc, "rule");
  if (rule == "cycle") {
    spec.rule = RoomTypeRule::cycle;
  } else if (rule == "uniform") {
    spec.rule = RoomTypeRule::uniform;
  } else {
    throw UsageError("--rule: expected cycle or uniform");
  }
  spec.n_houses = get_size(rc, "houses");
  spec.rooms_per_house = {get_size(rc, "rooms_min"), get_size(rc, "rooms_max")};
  spec.tokens_per_room = {get_size(rc, "tokens_min"), get_size(rc, "tokens_max")};
  spec.seed = need(rc, "seed").get<std::uint64_t>();

  const auto result = generate(spec);
  // Hash what a reader of corpus.csv will see; unused labels do not survive.
  const auto records = serialize_records(result.corpus);
  const auto hash = content_hash(parse_records(records));
  const auto dir = output_dir(rc);
  write_file(dir / "corpus.csv", csv_header(rc, hash) + records);
  json truth = to_json(result.truth, result.corpus.vocabulary());
  truth.update(provenance(rc, hash));
  write_file(dir / "truth.json", dump(truth));
  write_config(dir, rc, hash);
  out << "wrote " << result.corpus.houses().size() << " houses to "
      << dir.string() << "\n";
  return kOk;
}

std::vector<Command> commands() {
  std::vector<Command> cs;

  cs.push_back({"validate", "check a corpus CSV and print its summary",
                {corpus_param(), labels_param(),
                 {"output", Kind::text, nullptr, "write the summary here",
                  Role::path}}});

  Command train{"train", "fit one model and write model/state files",
                {corpus_param(),
                 {"family", Kind::text, "fg", "simple, cond, fg or cfg"},
                 {"k", Kind::uint, 10, "number of functional groups"},
                 {"seed", Kind::uint, 1, "chain seed"},
                 {"eta", Kind::real, kDefaultEta, "baseline smoothing"},
                 {"out", Kind::text, nullptr, "output directory", Role::path,
                  true}}};
  for (auto& p : chain_params()) train.params.push_back(p);
  cs.push_back(std::move(train));

  Command eval{"eval", "leave-one-house-out evaluation",
               {corpus_param(), labels_param(),
                {"families", Kind::text_list, json::array({"simple", "cond", "fg", "cfg"}),
                 "comma-separated families"},
                {"k", Kind::uint_list, json::array({10}), "comma-separated K grid"},
                {"seeds", Kind::uint, 1, "chains per (fold, K)"},
                {"seed", Kind::uint, 1, "root seed"},
                {"eta", Kind::real, kDefaultEta, "baseline smoothing"},
                {"particles", Kind::uint, 20, "left-to-right particles"},
                {"exact", Kind::flag, false,
                 "use exact enumeration where feasible"},
                {"phi_mode", Kind::text, "last", "last or average"},
                {"k_averaging", Kind::text, "perplexity",
                 "perplexity or log_prob"},
                {"k_select", Kind::uint, nullptr,
                 "summarize one K instead of averaging the grid"},
                {"workers", Kind::uint, 1, "worker threads", Role::runtime},
                {"out", Kind::text, nullptr, "output directory", Role::path,
                 true}}};
  for (auto& p : chain_params()) eval.params.push_back(p);
  cs.push_back(std::move(eval));

  auto analysis = [](std::string name, std::string help, bool smoothing) {
    Command c{std::move(name), std::move(help),
              {corpus_param(),
               {"chain", Kind::text, nullptr, "chain.json from train",
                Role::path, true},
               {"output", Kind::text, nullptr, "write the JSON report here",
                Role::path},
               {"csv", Kind::text, nullptr, "also write a CSV table",
                Role::path}}};
    if (smoothing)
      c.params.push_back(
          {"smooth", Kind::flag, false, "smooth P(a|k) with beta"});
    return c;
  };
  auto cooccur = analysis("cooccur", "objects likely to occur with an anchor", true);
  cooccur.params.push_back({"anchor", Kind::text, nullptr, "anchor artifact type",
                            Role::parameter, true});
  cooccur.params.push_back(
      {"with", Kind::text, nullptr, "score only this artifact type"});
  cooccur.params.push_back({"top", Kind::uint, 10, "ranking length"});
  cs.push_back(std::move(cooccur));

  auto topics = analysis("topics", "most probable types per functional group", true);
  topics.params.push_back({"top", Kind::uint, 5, "types per group"});
  cs.push_back(std::move(topics));

  auto profile = analysis("profile", "functional-group mix of room types", false);
  profile.params.push_back(labels_param());
  profile.params.push_back(
      {"room_type", Kind::integer, nullptr, "one room type (default: all)"});
  cs.push_back(std::move(profile));

  cs.push_back({"synth", "generate a synthetic corpus with known parameters",
                {{"k", Kind::uint, 3, "functional groups"},
                 {"vocab", Kind::uint, 30, "artifact types"},
                 {"phi", Kind::text, "dominant", "dominant or block"},
                 {"mass", Kind::real, 0.8, "mass on each group's own types"},
                 {"alpha", Kind::real_list, json::array({0.5}),
                  "1, K, or K per room type values"},
                 {"types", Kind::uint_list, json::array({1}), "room types used"},
                 {"rule", Kind::text, "cycle", "cycle or uniform"},
                 {"houses", Kind::uint, 10, "houses"},
                 {"rooms_min", Kind::uint, 5, "minimum rooms per house"},
                 {"rooms_max", Kind::uint, 5, "maximum rooms per house"},
                 {"tokens_min", Kind::uint, 20, "minimum objects per room"},
                 {"tokens_max", Kind::uint, 20, "maximum objects per room"},
                 {"seed", Kind::uint, 1, "generator seed"},
                 {"out", Kind::text, nullptr, "output directory", Role::path,
                  true}}});
  return cs;
}

int dispatch(const RunConfig& rc, std::ostream& out, std::ostream& err) {
  if (rc.command == "validate") return cmd_validate(rc, out);
  if (rc.command == "train") return cmd_train(rc, out);
  if (rc.command == "eval") return cmd_eval(rc, out, err);
  if (rc.command == "cooccur") return cmd_cooccur(rc, out);
  if (rc.command == "topics") return cmd_topics(rc, out);
  if (rc.command == "profile") return cmd_profile(rc, out);
  if (rc.command == "synth") return cmd_synth(rc, out);
  throw UsageError("unknown command " + rc.command);
}

}  // namespace

std::string RunConfig::canonical() const {
  return json{{"command", command}, {"parameters", parameters}}.dump();
}

std::uint64_t RunConfig::hash() const { return fnv1a(canonical()); }

json RunConfig::to_json() const {
  return json{{"format_version", kFormatVersion},
              {"kind", "run_config"},
              {"command", command},
              {"parameters", parameters},
              {"paths", paths},
              {"workers", workers},
              {"config_hash", to_hex(hash())}};
}

RunConfig RunConfig::from_json(const json& doc) {
  RunConfig rc;
  try {
    rc.command = doc.at("command").get<std::string>();
    rc.parameters = doc.at("parameters");
    rc.paths = doc.value("paths", json::object());
    rc.workers = doc.value("workers", std::size_t{1});
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed run config: ") + e.what());
  }
  if (!rc.parameters.is_object() || !rc.paths.is_object())
    throw DataError("malformed run config: expected objects");
  return rc;
}

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Models of artifact assemblages in houses and rooms",
               "assemblage"};
  app.require_subcommand(1);
  auto cs = commands();
  for (auto& c : cs) register_command(app, c);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    auto subs = app.get_subcommands();
    out << (subs.empty() ? app.help() : subs.front()->help());
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return kUsage;
  }

  try {
    for (auto& c : cs) {
      if (!c.app->parsed()) continue;
      return dispatch(resolve(c), out, err);
    }
    throw UsageError("no command given");
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << "\n";
    return kNumeric;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kData;
  }
}

}  // namespace assemblage::cli

#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "modalign/alignment_metrics.hpp"
#include "modalign/embedding_store.hpp"
#include "modalign/gradcheck.hpp"
#include "modalign/projection_head.hpp"
#include "modalign/protein_meta.hpp"
#include "modalign/retrieval.hpp"
#include "modalign/summarizer.hpp"
#include "modalign/synthetic.hpp"
#include "modalign/text_metrics.hpp"
#include "modalign/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace modalign::cli {

namespace {

// ---------------------------------------------------------------- config

/// JSON config files: top-level keys are subcommand names holding option
/// objects, e.g. {"train": {"epochs": 40, "lr": 0.001}}. Flags win.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App*, bool, bool, std::string) const override { return "{}"; }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    json j;
    try {
      input >> j;
    } catch (const json::exception& e) {
      throw CLI::ConversionError(std::string("config is not valid JSON: ") + e.what());
    }
    std::vector<CLI::ConfigItem> items;
    flatten(j, "", {}, items);
    return items;
  }

 private:
  static void flatten(const json& j, const std::string& name, std::vector<std::string> parents,
                      std::vector<CLI::ConfigItem>& items) {
    if (j.is_object()) {
      if (!name.empty()) parents.push_back(name);
      for (auto it = j.begin(); it != j.end(); ++it) flatten(*it, it.key(), parents, items);
      return;
    }
    if (name.empty()) throw CLI::ConversionError("config root must be an object");
    CLI::ConfigItem item;
    item.name = name;
    item.parents = parents;
    auto scalar = [](const json& v) {
      if (v.is_string()) return v.get<std::string>();
      if (v.is_boolean()) return std::string(v.get<bool>() ? "true" : "false");
      return v.dump();
    };
    if (j.is_array()) {
      for (const auto& v : j) item.inputs.push_back(scalar(v));
    } else {
      item.inputs.push_back(scalar(j));
    }
    items.push_back(std::move(item));
  }
};

// ---------------------------------------------------------------- helpers

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> parse_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name, const std::string& path) const {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) fail(ErrorCode::InvalidConfig, path + " has no column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  }
};

std::string read_text(const std::string& path) {
  if (!fs::is_regular_file(path)) fail(ErrorCode::FileNotFound, "no such file: " + path);
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CsvTable read_csv(const std::string& path) {
  std::istringstream in(read_text(path));
  CsvTable t;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    auto fields = parse_csv_line(line);
    if (first) {
      t.header = std::move(fields);
      first = false;
    } else {
      t.rows.push_back(std::move(fields));
    }
  }
  return t;
}

double parse_number(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    fail(ErrorCode::InvalidConfig, "not a number in " + what + ": '" + s + "'");
  }
}

std::vector<json> read_jsonl(const std::string& path) {
  std::istringstream in(read_text(path));
  std::vector<json> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::exception&) {
      fail(ErrorCode::InvalidConfig, path + ":" + std::to_string(lineno) + " is not valid JSON");
    }
  }
  return out;
}

std::string jstring(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key) || !j.at(key).is_string()) {
    fail(ErrorCode::InvalidConfig, where + " lacks string field '" + key + "'");
  }
  return j.at(key).get<std::string>();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoFailure, "cannot write " + path);
  out << text;
  if (!out) fail(ErrorCode::IoFailure, "write failed: " + path);
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) fail(ErrorCode::IoFailure, "cannot create directory " + dir);
}

void emit(std::ostream& out, const std::string& text, const std::string& path) {
  if (path.empty()) {
    out << text;
  } else {
    write_text(path, text);
  }
}

json manifest_json(const EmbeddingManifest& m) {
  return {{"model_name", m.model_name},
          {"modality", std::string(to_string(m.modality))},
          {"dim", m.dim},
          {"count", m.count},
          {"source", m.source}};
}

// ---------------------------------------------------------------- pair manifest

struct LoadedPair {
  PairedDataset paired;
  DatasetSplit split;
  std::string manifest_path;
};

LoadedPair load_pair(const std::string& manifest_path) {
  json manifest;
  try {
    manifest = json::parse(read_text(manifest_path));
  } catch (const json::exception&) {
    fail(ErrorCode::InvalidConfig, manifest_path + " is not valid JSON");
  }
  const fs::path base = fs::path(manifest_path).parent_path();
  auto load_side = [&](const char* key, Modality modality) {
    if (!manifest.contains(key)) fail(ErrorCode::InvalidConfig, manifest_path + " lacks '" + key + "'");
    const auto& side = manifest.at(key);
    return read_embedding_file(jstring(side, "source", manifest_path), modality,
                               jstring(side, "model_name", manifest_path));
  };
  auto paired = pair_datasets(load_side("graph", Modality::Graph), load_side("text", Modality::Text));

  json split_json;
  const std::string split_path = (base / jstring(manifest, "split", manifest_path)).string();
  try {
    split_json = json::parse(read_text(split_path));
  } catch (const json::exception&) {
    fail(ErrorCode::InvalidConfig, split_path + " is not valid JSON");
  }
  DatasetSplit split;
  try {
    split.seed = split_json.at("seed").get<std::uint64_t>();
    split.train = split_json.at("train").get<std::vector<std::string>>();
    split.validation = split_json.at("validation").get<std::vector<std::string>>();
    split.test = split_json.at("test").get<std::vector<std::string>>();
  } catch (const json::exception&) {
    fail(ErrorCode::InvalidConfig, split_path + " is not a split file");
  }
  return {std::move(paired), std::move(split), manifest_path};
}

std::vector<std::string> split_ids_named(const LoadedPair& p, const std::string& name) {
  if (name == "train") return p.split.train;
  if (name == "validation") return p.split.validation;
  if (name == "test") return p.split.test;
  if (name == "all") return p.paired.ids;
  fail(ErrorCode::InvalidConfig, "unknown split '" + name + "'");
}

PerProteinScores read_scores(const std::string& path) {
  const auto table = read_csv(path);
  const auto id_col = table.column("id", path);
  const auto score_col = table.column("score", path);
  PerProteinScores scores;
  std::set<std::string> seen;
  for (const auto& row : table.rows) {
    if (row.size() <= std::max(id_col, score_col)) fail(ErrorCode::InvalidConfig, "short row in " + path);
    if (!seen.insert(row[id_col]).second) fail(ErrorCode::DuplicateId, "duplicate id " + row[id_col] + " in " + path);
    scores.push_back({row[id_col], parse_number(row[score_col], path)});
  }
  return scores;
}

// ---------------------------------------------------------------- subcommands

struct IngestArgs {
  std::string graph, text, out, graph_name, text_name;
  std::uint64_t seed = 42;
};

int cmd_ingest(const IngestArgs& a, std::ostream& out) {
  const std::string graph_path = fs::absolute(a.graph).lexically_normal().string();
  const std::string text_path = fs::absolute(a.text).lexically_normal().string();
  auto graph = read_embedding_file(graph_path, Modality::Graph,
                                   a.graph_name.empty() ? std::nullopt : std::optional(a.graph_name));
  auto text = read_embedding_file(text_path, Modality::Text,
                                  a.text_name.empty() ? std::nullopt : std::optional(a.text_name));
  const auto graph_manifest = manifest_json(make_manifest(graph, graph_path));
  const auto text_manifest = manifest_json(make_manifest(text, text_path));
  const auto paired = pair_datasets(std::move(graph), std::move(text));
  const auto split = split_dataset(paired, a.seed);

  ensure_dir(a.out);
  const fs::path dir(a.out);
  write_text((dir / "graph.manifest.json").string(), graph_manifest.dump(2) + "\n");
  write_text((dir / "text.manifest.json").string(), text_manifest.dump(2) + "\n");
  const json split_json = {
      {"seed", split.seed}, {"train", split.train}, {"validation", split.validation}, {"test", split.test}};
  write_text((dir / "split.json").string(), split_json.dump(2) + "\n");
  const json pair = {{"graph", graph_manifest},
                     {"text", text_manifest},
                     {"paired_count", paired.ids.size()},
                     {"seed", a.seed},
                     {"split", "split.json"}};
  write_text((dir / "pair.json").string(), pair.dump(2) + "\n");
  out << json{{"paired", paired.ids.size()},
              {"train", split.train.size()},
              {"validation", split.validation.size()},
              {"test", split.test.size()},
              {"manifest", (dir / "pair.json").string()}}
             .dump()
      << "\n";
  return 0;
}

struct DescribeArgs {
  std::string fasta, out, meta_out;
};

int cmd_describe(const DescribeArgs& a, std::ostream& out) {
  const auto records = parse_fasta(read_text(a.fasta));
  const auto summarizer = summarizer_from_env();
  std::string lines;
  for (const auto& r : records) {
    const std::string description =
        (summarizer && r.chains.size() > 1) ? summarizer->summarize(r) : describe_protein(r);
    lines += json{{"id", r.protein_id}, {"description", description}}.dump() + "\n";
  }
  emit(out, lines, a.out);
  if (!a.meta_out.empty()) {
    std::string meta = "id,sequence_length,chain_count\n";
    for (const auto& r : records) {
      meta += csv_field(r.protein_id) + "," + std::to_string(r.sequence_length) + "," +
              std::to_string(r.chains.size()) + "\n";
    }
    write_text(a.meta_out, meta);
  }
  return 0;
}

struct RarityArgs {
  std::string fasta_dir, out;
  std::size_t top = 100;
};

int cmd_rarity(const RarityArgs& a, std::ostream& out) {
  if (!fs::is_directory(a.fasta_dir)) fail(ErrorCode::FileNotFound, "no such directory: " + a.fasta_dir);
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(a.fasta_dir)) {
    const auto ext = entry.path().extension().string();
    if (entry.is_regular_file() && (ext == ".fasta" || ext == ".fa" || ext == ".faa" || ext == ".txt")) {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<ProteinRecord> records;
  std::set<std::string> seen;
  for (const auto& f : files) {
    for (auto& r : parse_fasta(read_text(f.string()))) {
      if (!seen.insert(r.protein_id).second) fail(ErrorCode::DuplicateId, "protein " + r.protein_id + " appears in two files");
      records.push_back(std::move(r));
    }
  }
  if (records.empty()) fail(ErrorCode::NoRecords, "no FASTA files in " + a.fasta_dir);
  const auto table = rank_rarity(records, a.top);
  std::string csv = "id,category,count,label\n";
  for (const auto& [id, label] : table.label_of) {
    const auto& category = table.category_of.at(id);
    auto it = table.categories.find(category);
    const std::int64_t count = it == table.categories.end() ? 0 : it->second.count;
    csv += csv_field(id) + "," + csv_field(category) + "," + std::to_string(count) + "," +
           std::string(to_string(label)) + "\n";
  }
  emit(out, csv, a.out);
  return 0;
}

struct TrainArgs {
  std::string pair, out, hidden, preset, reweight;
  int layers = 1;
  double factor = 2.0;
  std::uint64_t seed = 42;
  int epochs = 40;
  double lr = 1e-3;
  int batch = 32;
  double tau = 0.2;
};

std::set<std::string> read_rare_ids(const std::string& path) {
  const auto table = read_csv(path);
  std::set<std::string> ids;
  const bool labelled = std::find(table.header.begin(), table.header.end(), "label") != table.header.end();
  const bool has_header = std::find(table.header.begin(), table.header.end(), "id") != table.header.end();
  if (labelled) {
    const auto id_col = table.column("id", path);
    const auto label_col = table.column("label", path);
    for (const auto& row : table.rows) {
      if (row.size() > std::max(id_col, label_col) && row[label_col] == "rare") ids.insert(row[id_col]);
    }
    return ids;
  }
  if (!has_header && !table.header.empty() && !table.header[0].empty()) ids.insert(table.header[0]);
  for (const auto& row : table.rows) {
    if (!row.empty() && !row[0].empty()) ids.insert(row[0]);
  }
  return ids;
}

int cmd_train(const TrainArgs& a, std::ostream& out) {
  auto loaded = load_pair(a.pair);
  const auto& paired = loaded.paired;
  const Eigen::Index graph_dim = paired.graph.dim();
  const Eigen::Index text_dim = paired.text.dim();

  HeadConfig graph_cfg{graph_dim, text_dim, {}, a.seed};
  if (a.layers < 1 || a.layers > 3) fail(ErrorCode::InvalidConfig, "--layers must be 1, 2 or 3");
  if (!a.preset.empty()) {
    const auto colon = a.preset.find(':');
    if (colon == std::string::npos) fail(ErrorCode::InvalidConfig, "--preset expects <gdm>:<llm>");
    graph_cfg = preset_config(a.preset.substr(0, colon), a.preset.substr(colon + 1), a.layers, a.seed);
    if (graph_cfg.input_dim != graph_dim || graph_cfg.output_dim != text_dim) {
      fail(ErrorCode::ConfigMismatch, "preset " + a.preset + " expects dims " + std::to_string(graph_cfg.input_dim) +
                                          "/" + std::to_string(graph_cfg.output_dim) + ", data has " +
                                          std::to_string(graph_dim) + "/" + std::to_string(text_dim));
    }
  } else {
    std::stringstream ss(a.hidden);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (!item.empty()) graph_cfg.hidden_dims.push_back(static_cast<Eigen::Index>(parse_number(item, "--hidden")));
    }
    if (graph_cfg.hidden_dims.size() + 1 != static_cast<std::size_t>(a.layers)) {
      fail(ErrorCode::InvalidConfig, "--layers " + std::to_string(a.layers) + " needs " +
                                         std::to_string(a.layers - 1) + " --hidden dims");
    }
  }
  const HeadConfig text_cfg{text_dim, text_dim, {}, a.seed + 1};

  TrainConfig cfg;
  cfg.learning_rate = a.lr;
  cfg.epochs = a.epochs;
  cfg.batch_size = a.batch;
  cfg.temperature = a.tau;
  cfg.seed = a.seed;
  if (!a.reweight.empty()) cfg.reweight = Reweighting{read_rare_ids(a.reweight), a.factor};
  cfg.validate();

  auto result = train_pair(paired, loaded.split, init_head(graph_cfg), init_head(text_cfg), cfg);

  ensure_dir(a.out);
  const fs::path dir(a.out);
  save_head(result.graph_head, (dir / "graph_head.phd").string());
  save_head(result.text_head, (dir / "text_head.phd").string());
  std::string history = "epoch,train_loss,val_loss,checkpointed\n";
  for (const auto& e : result.history.epochs) {
    history += std::to_string(e.epoch) + "," + format_double(e.train_loss) + "," + format_double(e.val_loss) + "," +
               (e.checkpointed ? "1" : "0") + "\n";
  }
  write_text((dir / "history.csv").string(), history);
  const json run = {{"pair", fs::absolute(a.pair).lexically_normal().string()},
                    {"graph_head", "graph_head.phd"},
                    {"text_head", "text_head.phd"},
                    {"layers", a.layers},
                    {"hidden_dims", graph_cfg.hidden_dims},
                    {"seed", a.seed},
                    {"epochs", a.epochs},
                    {"lr", a.lr},
                    {"batch", a.batch},
                    {"tau", a.tau},
                    {"reweight_count", cfg.reweight ? cfg.reweight->rare_ids.size() : 0},
                    {"factor", a.factor},
                    {"initial_val_loss", result.history.initial_val_loss}};
  write_text((dir / "run.json").string(), run.dump(2) + "\n");

  double best = result.history.initial_val_loss;
  for (const auto& e : result.history.epochs) best = std::min(best, e.val_loss);
  out << json{{"epochs", result.history.epochs.size()},
              {"initial_val_loss", result.history.initial_val_loss},
              {"best_val_loss", best},
              {"out", dir.string()}}
             .dump()
      << "\n";
  return 0;
}

struct EvalArgs {
  std::string pair, gh, th, split = "test", out;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const auto loaded = load_pair(a.pair);
  const auto ids = split_ids_named(loaded, a.split);
  const auto rep = model_pair_score(ids, load_head(a.gh), load_head(a.th), loaded.paired);
  const json j = {{"positive", rep.positive}, {"negative", rep.negative}, {"alignment", rep.alignment},
                  {"N", rep.n},               {"M", rep.m}};
  emit(out, j.dump() + "\n", a.out);
  return 0;
}

int cmd_per_protein(const EvalArgs& a, std::ostream& out) {
  const auto loaded = load_pair(a.pair);
  const auto ids = split_ids_named(loaded, a.split);
  const auto scores = per_protein_scores(ids, load_head(a.gh), load_head(a.th), loaded.paired);
  std::string csv = "id,score\n";
  for (const auto& s : scores) csv += csv_field(s.id) + "," + format_double(s.score) + "\n";
  emit(out, csv, a.out);
  return 0;
}

struct CorrelateArgs {
  std::vector<std::string> files;
  std::string out;
};

int cmd_correlate(const CorrelateArgs& a, std::ostream& out) {
  if (a.files.size() < 2) fail(ErrorCode::InvalidConfig, "correlate needs at least two score files");
  std::vector<std::pair<std::string, PerProteinScores>> lists;
  for (const auto& f : a.files) lists.emplace_back(fs::path(f).stem().string(), read_scores(f));
  const auto m = correlation_matrix(lists);
  std::string csv = "label";
  for (const auto& l : m.labels) csv += "," + csv_field(l);
  csv += "\n";
  for (std::size_t r = 0; r < m.labels.size(); ++r) {
    csv += csv_field(m.labels[r]);
    for (std::size_t c = 0; c < m.labels.size(); ++c) {
      csv += "," + format_double(m.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)));
    }
    csv += "\n";
  }
  emit(out, csv, a.out);
  return 0;
}

struct AnalyzeArgs {
  std::string mode, scores, meta, out;
};

json stats_json(const GroupSummary& g) {
  json j = {{"n", g.n}};
  if (g.stats) {
    j["mean"] = g.stats->mean;
    j["median"] = g.stats->median;
    j["q1"] = g.stats->q1;
    j["q3"] = g.stats->q3;
    j["min"] = g.stats->min;
    j["max"] = g.stats->max;
  }
  return j;
}

int cmd_analyze(const AnalyzeArgs& a, std::ostream& out) {
  const auto scores = read_scores(a.scores);
  const auto meta = read_csv(a.meta);
  const auto id_col = meta.column("id", a.meta);
  json result;
  if (a.mode == "length") {
    const auto len_col = meta.column("sequence_length", a.meta);
    std::map<std::string, double> length_of;
    for (const auto& row : meta.rows) {
      if (row.size() > std::max(id_col, len_col)) length_of[row[id_col]] = parse_number(row[len_col], a.meta);
    }
    std::vector<double> xs, ys;
    for (const auto& s : scores) {
      auto it = length_of.find(s.id);
      if (it == length_of.end()) fail(ErrorCode::UnknownId, "no sequence length for " + s.id);
      xs.push_back(it->second);
      ys.push_back(s.score);
    }
    const auto fit = ols_fit(xs, ys);
    result = {{"slope", fit.slope}, {"intercept", fit.intercept}, {"n", fit.n}};
    result["pearson_r"] = fit.pearson_r ? json(*fit.pearson_r) : json(nullptr);
  } else if (a.mode == "chains") {
    const auto chain_col = meta.column("chain_count", a.meta);
    std::map<std::string, ChainGroup> group_of;
    for (const auto& row : meta.rows) {
      if (row.size() > std::max(id_col, chain_col)) {
        group_of[row[id_col]] = parse_number(row[chain_col], a.meta) > 1 ? ChainGroup::Multiple : ChainGroup::Single;
      }
    }
    const auto summary = group_summary(scores, group_of);
    result = {{"single", stats_json(summary.at(ChainGroup::Single))},
              {"multiple", stats_json(summary.at(ChainGroup::Multiple))}};
  } else {
    fail(ErrorCode::InvalidConfig, "analyze mode must be 'length' or 'chains'");
  }
  emit(out, result.dump() + "\n", a.out);
  return 0;
}

struct RetrieveArgs {
  std::string index, query_id, descriptions, out;
  std::string input = "Describe the protein in detail.";
  std::size_t k = 3;
};

int cmd_retrieve(const RetrieveArgs& a, std::ostream& out) {
  const fs::path dir(a.index);
  json run;
  try {
    run = json::parse(read_text((dir / "run.json").string()));
  } catch (const json::exception&) {
    fail(ErrorCode::InvalidConfig, (dir / "run.json").string() + " is not valid JSON");
  }
  const auto loaded = load_pair(jstring(run, "pair", "run.json"));
  const auto head = load_head((dir / jstring(run, "graph_head", "run.json")).string());
  const auto index = build_index(loaded.split.train, head, loaded.paired);
  auto result = query_topk(index, a.query_id, head, loaded.paired, a.k);

  std::map<std::string, std::string> descriptions;
  for (const auto& j : read_jsonl(a.descriptions)) {
    descriptions[jstring(j, "id", a.descriptions)] = jstring(j, "description", a.descriptions);
  }
  result.augmented_text = augment_input(result, descriptions, a.input);

  json neighbors = json::array();
  for (const auto& n : result.neighbors) neighbors.push_back({{"id", n.id}, {"cosine", n.cosine}});
  const json j = {{"query_id", result.query_id},
                  {"k", a.k},
                  {"neighbors", neighbors},
                  {"augmented_text", result.augmented_text}};
  emit(out, j.dump() + "\n", a.out);
  return 0;
}

struct TextScoreArgs {
  std::string candidates, references, out;
};

int cmd_textscore(const TextScoreArgs& a, std::ostream& out) {
  std::map<std::string, std::string> refs;
  for (const auto& j : read_jsonl(a.references)) {
    const auto id = jstring(j, "id", a.references);
    if (!refs.emplace(id, jstring(j, "text", a.references)).second) {
      fail(ErrorCode::DuplicateId, "duplicate reference id " + id);
    }
  }
  std::map<std::string, std::string> cands;
  for (const auto& j : read_jsonl(a.candidates)) {
    const auto id = jstring(j, "id", a.candidates);
    if (!cands.emplace(id, jstring(j, "text", a.candidates)).second) {
      fail(ErrorCode::DuplicateId, "duplicate candidate id " + id);
    }
  }
  std::vector<std::pair<std::string, std::string>> pairs;
  for (const auto& [id, text] : cands) {
    auto it = refs.find(id);
    if (it == refs.end()) fail(ErrorCode::UnknownId, "no reference for candidate " + id);
    pairs.emplace_back(text, it->second);
  }
  const auto score = score_corpus(pairs);
  emit(out, json{{"rouge", score.rouge}, {"bleu", score.bleu}, {"n", score.n}}.dump() + "\n", a.out);
  return 0;
}

struct SyntheticArgs {
  SyntheticSpec spec;
  std::string out;
  bool independent = false;
};

int cmd_gen_synthetic(const SyntheticArgs& a, std::ostream& out) {
  const auto paired = a.independent ? gen_independent(a.spec.n, a.spec.graph_dim, a.spec.text_dim, a.spec.seed)
                                    : gen_synthetic(a.spec);
  ensure_dir(a.out);
  const fs::path dir(a.out);
  write_embedding_file(paired.graph, (dir / "graph.emb").string());
  write_embedding_file(paired.text, (dir / "text.emb").string());
  out << json{{"graph", (dir / "graph.emb").string()}, {"text", (dir / "text.emb").string()}, {"n", paired.ids.size()}}
             .dump()
      << "\n";
  return 0;
}

struct GradcheckArgs {
  std::size_t instances = 20;
  std::uint64_t seed = 42;
  double step = 1e-4;
  double tolerance = 1e-4;
  std::string out;
};

int cmd_gradcheck(const GradcheckArgs& a, std::ostream& out) {
  const auto rep = run_gradient_check(a.instances, a.seed, a.step, a.tolerance);
  const json j = {{"instances", rep.instances},
                  {"parameters", rep.parameters},
                  {"max_rel_error", rep.max_rel_error},
                  {"tolerance", a.tolerance},
                  {"passed", rep.passed}};
  emit(out, j.dump() + "\n", a.out);
  if (!rep.passed) fail(ErrorCode::Internal, "analytic gradients disagree with finite differences");
  return 0;
}

void report_error(std::ostream& err, std::string_view code, const std::string& message) {
  err << json{{"error", std::string(code)}, {"message", message}}.dump() << "\n";
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cross-modal projection-head alignment toolkit", "modalign"};
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON config file; command-line flags override it");
  app.require_subcommand(1);

  IngestArgs ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Pair two EMB1 files and write manifests plus the 80/10/10 split");
  c_ingest->add_option("--graph", ingest.graph, "Structure-model EMB1 file")->required();
  c_ingest->add_option("--text", ingest.text, "Language-model EMB1 file")->required();
  c_ingest->add_option("--graph-name", ingest.graph_name, "Model name for the graph set (default: file stem)");
  c_ingest->add_option("--text-name", ingest.text_name, "Model name for the text set (default: file stem)");
  c_ingest->add_option("--seed", ingest.seed, "Split seed")->capture_default_str();
  c_ingest->add_option("--out", ingest.out, "Output directory")->required();

  DescribeArgs describe;
  auto* c_describe = app.add_subcommand("describe", "Render FASTA records as JSON-lines descriptions");
  c_describe->add_option("--fasta", describe.fasta, "FASTA file")->required();
  c_describe->add_option("--out", describe.out, "Write JSON lines here instead of stdout");
  c_describe->add_option("--meta-out", describe.meta_out, "Also write id,sequence_length,chain_count CSV");

  RarityArgs rarity;
  auto* c_rarity = app.add_subcommand("rarity", "Rank proteins by molecule+organism category frequency");
  c_rarity->add_option("--fasta-dir", rarity.fasta_dir, "Directory of FASTA files")->required();
  c_rarity->add_option("--top", rarity.top, "Categories per rare/popular tier")->capture_default_str();
  c_rarity->add_option("--out", rarity.out, "Write CSV here instead of stdout");

  TrainArgs train;
  auto* c_train = app.add_subcommand("train", "Train graph/text projection heads contrastively");
  c_train->add_option("--pair", train.pair, "pair.json written by ingest")->required();
  c_train->add_option("--layers", train.layers, "Graph head layer count (1-3)")->capture_default_str();
  c_train->add_option("--hidden", train.hidden, "Hidden dims, comma separated");
  c_train->add_option("--preset", train.preset, "<gdm>:<llm> hidden-dim preset");
  c_train->add_option("--reweight", train.reweight, "CSV of rare protein IDs (rarity output accepted)");
  c_train->add_option("--factor", train.factor, "Loss multiplier for rare proteins")->capture_default_str();
  c_train->add_option("--seed", train.seed, "Seed for init and shuffling")->capture_default_str();
  c_train->add_option("--epochs", train.epochs)->capture_default_str();
  c_train->add_option("--lr", train.lr)->capture_default_str();
  c_train->add_option("--batch", train.batch)->capture_default_str();
  c_train->add_option("--tau", train.tau, "Temperature")->capture_default_str();
  c_train->add_option("--out", train.out, "Output directory")->required();

  EvalArgs eval;
  auto* c_eval = app.add_subcommand("eval", "Model-pair alignment score as JSON");
  EvalArgs per;
  auto* c_per = app.add_subcommand("per-protein", "Per-protein positive-pair cosine as CSV");
  for (auto [cmd, args] : {std::pair{c_eval, &eval}, std::pair{c_per, &per}}) {
    cmd->add_option("--pair", args->pair, "pair.json written by ingest")->required();
    cmd->add_option("--gh", args->gh, "Graph head PHD1 file")->required();
    cmd->add_option("--th", args->th, "Text head PHD1 file")->required();
    cmd->add_option("--split", args->split, "train|validation|test|all")->capture_default_str();
    cmd->add_option("--out", args->out, "Output file (default stdout)");
  }

  CorrelateArgs correlate;
  auto* c_correlate = app.add_subcommand("correlate", "Pearson matrix across per-protein score files");
  c_correlate->add_option("files", correlate.files, "Score CSV files (id,score)")->required();
  c_correlate->add_option("--out", correlate.out, "Output CSV (default stdout)");

  AnalyzeArgs analyze;
  auto* c_analyze = app.add_subcommand("analyze", "Length regression or chain-group summary");
  c_analyze->add_option("mode", analyze.mode, "length|chains")->required();
  c_analyze->add_option("--scores", analyze.scores, "Score CSV (id,score)")->required();
  c_analyze->add_option("--meta", analyze.meta, "Metadata CSV from describe --meta-out")->required();
  c_analyze->add_option("--out", analyze.out, "Output JSON (default stdout)");

  RetrieveArgs retrieve;
  auto* c_retrieve = app.add_subcommand("retrieve", "Top-k neighbours over the training index plus augmented input");
  c_retrieve->add_option("--index", retrieve.index, "Directory written by train")->required();
  c_retrieve->add_option("--query-id", retrieve.query_id, "Protein to query")->required();
  c_retrieve->add_option("--k", retrieve.k)->capture_default_str();
  c_retrieve->add_option("--descriptions", retrieve.descriptions, "JSON lines {id, description}")->required();
  c_retrieve->add_option("--input", retrieve.input, "Original generation input")->capture_default_str();
  c_retrieve->add_option("--out", retrieve.out, "Output JSON (default stdout)");

  TextScoreArgs textscore;
  auto* c_textscore = app.add_subcommand("textscore", "Macro ROUGE-L / BLEU of candidates vs references");
  c_textscore->add_option("--candidates", textscore.candidates, "JSON lines {id, text}")->required();
  c_textscore->add_option("--references", textscore.references, "JSON lines {id, text}")->required();
  c_textscore->add_option("--out", textscore.out, "Output JSON (default stdout)");

  SyntheticArgs synth;
  auto* c_synth = app.add_subcommand("gen-synthetic", "Write a synthetic paired EMB1 fixture");
  c_synth->add_option("--n", synth.spec.n)->capture_default_str();
  c_synth->add_option("--latent", synth.spec.latent_dim)->capture_default_str();
  c_synth->add_option("--g-dim", synth.spec.graph_dim)->capture_default_str();
  c_synth->add_option("--t-dim", synth.spec.text_dim)->capture_default_str();
  c_synth->add_option("--noise", synth.spec.noise)->capture_default_str();
  c_synth->add_option("--seed", synth.spec.seed)->capture_default_str();
  c_synth->add_flag("--identity", synth.spec.identity_maps, "Identity maps instead of random ones");
  c_synth->add_flag("--independent", synth.independent, "Independent Gaussian modalities (no shared signal)");
  c_synth->add_option("--out", synth.out, "Output directory")->required();

  GradcheckArgs gradcheck;
  auto* c_grad = app.add_subcommand("gradcheck", "Finite-difference check of the training gradients");
  c_grad->add_option("--instances", gradcheck.instances)->capture_default_str();
  c_grad->add_option("--seed", gradcheck.seed)->capture_default_str();
  c_grad->add_option("--step", gradcheck.step)->capture_default_str();
  c_grad->add_option("--tol", gradcheck.tolerance)->capture_default_str();
  c_grad->add_option("--out", gradcheck.out, "Output JSON (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    const bool missing_config = dynamic_cast<const CLI::FileError*>(&e) != nullptr;
    report_error(err, missing_config ? "FileNotFound" : "UsageError", e.what());
    return 1;
  }

  try {
    if (c_ingest->parsed()) return cmd_ingest(ingest, out);
    if (c_describe->parsed()) return cmd_describe(describe, out);
    if (c_rarity->parsed()) return cmd_rarity(rarity, out);
    if (c_train->parsed()) return cmd_train(train, out);
    if (c_eval->parsed()) return cmd_eval(eval, out);
    if (c_per->parsed()) return cmd_per_protein(per, out);
    if (c_correlate->parsed()) return cmd_correlate(correlate, out);
    if (c_analyze->parsed()) return cmd_analyze(analyze, out);
    if (c_retrieve->parsed()) return cmd_retrieve(retrieve, out);
    if (c_textscore->parsed()) return cmd_textscore(textscore, out);
    if (c_synth->parsed()) return cmd_gen_synthetic(synth, out);
    if (c_grad->parsed()) return cmd_gradcheck(gradcheck, out);
  } catch (const Error& e) {
    report_error(err, to_string(e.code()), e.what());
    return is_user_error(e.code()) ? 1 : 2;
  } catch (const std::exception& e) {
    report_error(err, "Internal", e.what());
    return 2;
  }
  report_error(err, "UsageError", "no subcommand");
  return 1;
}

}  // namespace modalign::cli

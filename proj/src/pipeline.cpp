#include "agglom/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "agglom/csv.hpp"
#include "agglom/error.hpp"
#include "agglom/rng.hpp"

namespace agglom {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// configuration

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  fail_input("config: bad boolean for '" + key + "': " + v);
}

std::uint64_t parse_u64(const std::string& v, const std::string& key) {
  // stoull silently wraps negative inputs
  if (v.find('-') != std::string::npos)
    fail_input("config: '" + key + "' must be nonnegative (got " + v + ")");
  try {
    std::size_t used = 0;
    std::uint64_t parsed = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return parsed;
  } catch (...) {
    fail_input("config: bad integer for '" + key + "': " + v);
  }
}

double parse_double(const std::string& v, const std::string& key) {
  try {
    return std::stod(v);
  } catch (...) {
    fail_input("config: bad number for '" + key + "': " + v);
  }
}

void set_key(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "employment") cfg.employment = value;
  else if (key == "occupations") cfg.occupations = value;
  else if (key == "io_table") cfg.io_table = value;
  else if (key == "patents") cfg.patents = value;
  else if (key == "education") cfg.education = value;
  else if (key == "sectors") cfg.sectors = value;
  else if (key == "synthetic") cfg.synthetic = parse_bool(value, key);
  else if (key == "clusters") cfg.clusters = value;
  else if (key == "regimes") cfg.regimes = value;
  else if (key == "synth_regions") cfg.synth_regions = parse_u64(value, key);
  else if (key == "synth_occupations") cfg.synth_occupations = parse_u64(value, key);
  else if (key == "seed") cfg.seed = parse_u64(value, key);
  else if (key == "mode") {
    auto m = parse_mode(value);
    if (!m) fail_input("config: bad mode: " + value);
    cfg.mode = *m;
  } else if (key == "times") cfg.times = value;
  else if (key == "repeats") cfg.repeats = static_cast<int>(parse_u64(value, key));
  else if (key == "nulls") cfg.nulls = static_cast<int>(parse_u64(value, key));
  else if (key == "null_variant") {
    if (value == "shuffle") cfg.null_variant = NullVariant::ShuffleEdges;
    else if (value == "degree-preserving") cfg.null_variant = NullVariant::DegreePreserving;
    else fail_input("config: bad null_variant: " + value);
  } else if (key == "clip") {
    if (value == "clip") cfg.clip = ClipPolicy::Clip;
    else if (value == "shift-min") cfg.clip = ClipPolicy::ShiftMin;
    else if (value == "abs") cfg.clip = ClipPolicy::Abs;
    else fail_input("config: bad clip policy: " + value);
  } else if (key == "alpha") {
    cfg.alpha = parse_double(value, key);
    if (!(cfg.alpha > 0.0) || !(cfg.alpha < 1.0))
      fail_input("config: alpha must lie in (0, 1)");
  }
  else if (key == "weighting") {
    if (value != "all" && value != "ols" && value != "wlsi" && value != "wlsii")
      fail_input("config: bad weighting: " + value);
    cfg.weighting = value;
  } else if (key == "workers") cfg.workers = static_cast<int>(parse_u64(value, key));
  else if (key == "components") {
    if (value != "largest" && value != "all") fail_input("config: bad components: " + value);
    cfg.components = value;
  } else if (key == "x_share") {
    if (value == "total") cfg.x_share = RegionShareMode::TotalEmployment;
    else if (value == "mean") cfg.x_share = RegionShareMode::MeanOverIndustries;
    else fail_input("config: bad x_share: " + value);
  } else if (key == "edu_weighted") cfg.edu_weighted = parse_bool(value, key);
  else if (key == "use_knowledge") cfg.use_knowledge = parse_bool(value, key);
  else if (key == "top_fraction") cfg.top_fraction = parse_double(value, key);
  else if (key == "vi_pair_cap") cfg.vi_pair_cap = parse_u64(value, key);
  else if (key == "stages") cfg.stages = value;
  else if (key == "out") cfg.out = value;
  else fail_input("config: unknown key '" + key + "'");
}

}  // namespace

void apply_config_file(RunConfig& cfg, const fs::path& file) {
  std::ifstream in(file);
  if (!in) fail_input("cannot open config file: " + file.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    auto eq = t.find('=');
    if (eq == std::string::npos)
      fail_input(file.string() + ": malformed config line " + std::to_string(lineno));
    set_key(cfg, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
}

std::string serialize_config(const RunConfig& cfg) {
  std::ostringstream out;
  auto emit = [&](const char* key, const std::string& value) {
    out << key << " = " << value << "\n";
  };
  emit("employment", cfg.employment);
  emit("occupations", cfg.occupations);
  emit("io_table", cfg.io_table);
  emit("patents", cfg.patents);
  emit("education", cfg.education);
  emit("sectors", cfg.sectors);
  emit("synthetic", cfg.synthetic ? "true" : "false");
  emit("clusters", cfg.clusters);
  emit("regimes", cfg.regimes);
  emit("synth_regions", std::to_string(cfg.synth_regions));
  emit("synth_occupations", std::to_string(cfg.synth_occupations));
  emit("seed", std::to_string(cfg.seed));
  emit("mode", mode_name(cfg.mode));
  emit("times", cfg.times);
  emit("repeats", std::to_string(cfg.repeats));
  emit("nulls", std::to_string(cfg.nulls));
  emit("null_variant", null_variant_name(cfg.null_variant));
  emit("clip", clip_policy_name(cfg.clip));
  emit("alpha", csv::format_number(cfg.alpha));
  emit("weighting", cfg.weighting);
  emit("workers", std::to_string(cfg.workers));
  emit("components", cfg.components);
  emit("x_share", cfg.x_share == RegionShareMode::TotalEmployment ? "total" : "mean");
  emit("edu_weighted", cfg.edu_weighted ? "true" : "false");
  emit("use_knowledge", cfg.use_knowledge ? "true" : "false");
  emit("top_fraction", csv::format_number(cfg.top_fraction));
  emit("vi_pair_cap", std::to_string(cfg.vi_pair_cap));
  emit("stages", cfg.stages);
  emit("out", cfg.out);
  return out.str();
}

std::string config_hash(const RunConfig& cfg) {
  // out and workers do not affect results
  RunConfig normalized = cfg;
  normalized.out = "";
  normalized.workers = 0;
  std::uint64_t h = fnv1a64(serialize_config(normalized));
  char buf[32];
  std::snprintf(buf, sizeof(buf), "fnv64:%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<double> parse_time_grid(const std::string& spec) {
  std::vector<double> out;
  if (spec.find(':') != std::string::npos) {
    double tmin = 0.0, tmax = 0.0;
    unsigned long points = 0;
    char extra = 0;
    if (std::sscanf(spec.c_str(), "%lf:%lf:%lu%c", &tmin, &tmax, &points, &extra) != 3)
      fail_input("bad time grid '" + spec + "' (expected min:max:points)");
    return log_time_grid(tmin, tmax, points);
  }
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    try {
      out.push_back(std::stod(item));
    } catch (...) {
      fail_input("bad time value '" + item + "'");
    }
  }
  if (out.empty()) fail_input("empty time grid");
  for (std::size_t i = 1; i < out.size(); ++i)
    if (!(out[i] > out[i - 1])) fail_input("time grid must be strictly increasing");
  return out;
}

std::vector<std::size_t> parse_size_list(const std::string& spec) {
  std::vector<std::size_t> out;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    try {
      out.push_back(std::stoull(item));
    } catch (...) {
      fail_input("bad size '" + item + "' in list '" + spec + "'");
    }
  }
  return out;
}

std::vector<Regime> parse_regime_list(const std::string& spec) {
  std::vector<Regime> out;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    auto r = parse_regime(item);
    if (!r) fail_input("bad regime '" + item + "' (expected labour|io)");
    out.push_back(*r);
  }
  return out;
}

SyntheticSpec synthetic_spec_from_config(const RunConfig& cfg) {
  SyntheticSpec spec;
  spec.cluster_sizes = parse_size_list(cfg.clusters);
  spec.regimes = parse_regime_list(cfg.regimes);
  spec.n_regions = cfg.synth_regions;
  spec.n_occupations = cfg.synth_occupations;
  spec.seed = derive_seed(cfg.seed, "synthetic");
  return spec;
}

// ---------------------------------------------------------------------------
// shared file formats

void write_partition_json(const fs::path& path, const NamedPartition& p) {
  json j;
  j["name"] = p.name;
  if (std::isfinite(p.time))
    j["time"] = p.time;
  else
    j["time"] = nullptr;
  j["mode"] = mode_name(p.mode);
  j["communities"] = p.communities;
  csv::write_file(path, j.dump(2) + "\n");
}

NamedPartition read_partition_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail_input("cannot open partition file: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    fail_input(path.string() + ": bad JSON: " + e.what());
  }
  NamedPartition p;
  p.name = j.value("name", path.stem().string());
  if (j.contains("time") && !j["time"].is_null()) p.time = j["time"].get<double>();
  auto m = parse_mode(j.value("mode", "continuous"));
  p.mode = m.value_or(Mode::Continuous);
  if (!j.contains("communities")) fail_input(path.string() + ": missing 'communities'");
  for (const auto& community : j["communities"]) {
    std::vector<std::string> ids;
    for (const auto& id : community) ids.push_back(id.get<std::string>());
    p.communities.push_back(std::move(ids));
  }
  return p;
}

NamedPartition to_named_partition(const std::string& name, double time, Mode mode,
                                  const Partition& p,
                                  const std::vector<std::string>& node_ids) {
  NamedPartition out;
  out.name = name;
  out.time = time;
  out.mode = mode;
  out.communities.resize(p.k());
  for (std::size_t i = 0; i < p.size(); ++i)
    out.communities[p.community_of(i)].push_back(node_ids[i]);
  return out;
}

std::vector<std::vector<std::size_t>> communities_to_indices(const NamedPartition& p,
                                                             const IndustryCatalog& catalog) {
  std::vector<std::vector<std::size_t>> out;
  out.reserve(p.communities.size());
  for (const auto& community : p.communities) {
    std::vector<std::size_t> idx;
    idx.reserve(community.size());
    for (const auto& id : community) {
      auto it = catalog.industry_index.find(id);
      if (it == catalog.industry_index.end())
        fail_input("partition '" + p.name + "' names unknown industry '" + id + "'");
      idx.push_back(it->second);
    }
    std::sort(idx.begin(), idx.end());
    out.push_back(std::move(idx));
  }
  return out;
}

void write_sweep_csv(const fs::path& path, const SweepResult& sr,
                     const std::vector<double>& null_mean_vi) {
  std::ostringstream out;
  out << "t,k,r,mean_vi";
  if (!null_mean_vi.empty()) out << ",null_mean_vi";
  out << "\n";
  for (std::size_t i = 0; i < sr.points.size(); ++i) {
    const auto& pt = sr.points[i];
    out << csv::format_number(pt.t) << "," << pt.k << "," << csv::format_number(pt.r) << ","
        << csv::format_number(pt.mean_vi);
    if (!null_mean_vi.empty()) out << "," << csv::format_number(null_mean_vi[i]);
    out << "\n";
  }
  csv::write_file(path, out.str());
}

void write_estimates_csv(const fs::path& path, const std::vector<ChannelEstimate>& estimates) {
  std::ostringstream out;
  out << "scope_type,scope_id,channel,beta,se,t,p,r2,n\n";
  for (const auto& est : estimates) {
    if (!est.defined) continue;
    out << scope_name(est.scope) << "," << est.scope_id << "," << channel_name(est.channel)
        << "," << csv::format_number(est.fit.beta) << "," << csv::format_number(est.fit.se)
        << "," << csv::format_number(est.fit.t_stat) << ","
        << csv::format_number(est.fit.p_value) << "," << csv::format_number(est.fit.r2) << ","
        << est.fit.n << "\n";
  }
  csv::write_file(path, out.str());
}

std::string fnv_file_hash(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail_input("cannot hash missing file: " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[65536];
  while (in) {
    in.read(buf, sizeof(buf));
    std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  char hex[32];
  std::snprintf(hex, sizeof(hex), "fnv64:%016llx", static_cast<unsigned long long>(h));
  return hex;
}

// ---------------------------------------------------------------------------
// pipeline

namespace {

struct StagePlan {
  bool auto_mode = true;
  std::set<std::string> wanted;

  bool enabled(const std::string& stage) const {
    return auto_mode || wanted.count(stage) > 0;
  }
  bool required(const std::string& stage) const { return !auto_mode && wanted.count(stage) > 0; }
};

StagePlan parse_stages(const std::string& spec) {
  StagePlan plan;
  if (spec == "auto" || spec == "all" || spec.empty()) return plan;
  plan.auto_mode = false;
  std::stringstream ss(spec);
  std::string item;
  const std::set<std::string> known = {"proximity", "network", "communities",
                                      "regress",   "education"};
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    if (!known.count(item)) fail_input("config: unknown stage '" + item + "'");
    plan.wanted.insert(item);
  }
  return plan;
}

[[noreturn]] void stage_error(const std::string& stage, const Error& e) {
  throw Error(e.kind(), "stage " + stage + ": " + e.what());
}

template <typename F>
auto run_stage(const std::string& stage, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    stage_error(stage, e);
  }
}

std::string dominant_channel(const ChannelEstimate& l, const ChannelEstimate& io,
                             double alpha) {
  const bool l_sig = l.defined && l.fit.p_value < alpha;
  const bool io_sig = io.defined && io.fit.p_value < alpha;
  if (l_sig && io_sig) return l.fit.beta >= io.fit.beta ? "L" : "IO";
  if (l_sig) return "L";
  if (io_sig) return "IO";
  return "none";
}

}  // namespace

PipelineSummary run_pipeline(const RunConfig& cfg) {
  PipelineSummary summary;
  const fs::path out = cfg.out;
  if (out.empty()) fail_input("output directory not set");
  fs::create_directories(out);

  StagePlan plan = parse_stages(cfg.stages);
  json manifest;
  manifest["tool"] = "agglom";
  manifest["config_hash"] = config_hash(cfg);
  manifest["master_seed"] = cfg.seed;
  json stage_seeds;
  json inputs = json::object();

  {
    // the persisted config is location independent: replays provide --out
    RunConfig persisted = cfg;
    persisted.out = "";
    csv::write_file(out / "config.ini", serialize_config(persisted));
  }

  // ---- ingest ----
  TableSet tables;
  std::optional<Partition> ground_truth;
  if (cfg.synthetic) {
    run_stage("ingest", [&] {
      SyntheticSpec spec = synthetic_spec_from_config(cfg);
      stage_seeds["synthetic"] = spec.seed;
      SyntheticEconomy eco = generate_synthetic_economy(spec);
      tables = std::move(eco.tables);
      ground_truth = std::move(eco.ground_truth);

      const fs::path tdir = out / "tables";
      write_employment(tdir / "employment.csv", tables.catalog, tables.employment);
      write_occupations(tdir / "occupations.csv", tables.catalog, tables.occupations);
      write_flows(tdir / "io_table.csv", tables.catalog, tables.flows);
      if (tables.citations)
        write_citations(tdir / "patents.csv", tables.catalog, *tables.citations);
      if (tables.education)
        write_education(tdir / "education.csv", tables.catalog, *tables.education);
      if (tables.sectors) write_sectors(tdir / "sectors.csv", tables.catalog, *tables.sectors);

      json gt;
      gt["regimes"] = json::array();
      for (auto r : eco.regimes) gt["regimes"].push_back(regime_name(r));
      auto comms = ground_truth->communities();
      json jc = json::array();
      for (const auto& members : comms) {
        json ids = json::array();
        for (auto i : members) ids.push_back(tables.catalog.industry_id(i));
        jc.push_back(ids);
      }
      gt["clusters"] = jc;
      csv::write_file(tdir / "ground_truth.json", gt.dump(2) + "\n");

      for (const char* f : {"employment.csv", "occupations.csv", "io_table.csv", "patents.csv",
                            "education.csv", "sectors.csv"})
        inputs[std::string("tables/") + f] = fnv_file_hash(tdir / f);
      return 0;
    });
  } else {
    run_stage("ingest", [&] {
      if (cfg.employment.empty() || cfg.occupations.empty() || cfg.io_table.empty())
        fail_input("employment, occupations and io_table inputs are required "
                   "(or enable the synthetic generator)");
      TablePaths paths;
      paths.employment = cfg.employment;
      paths.occupations = cfg.occupations;
      paths.io_table = cfg.io_table;
      if (!cfg.patents.empty()) paths.patents = cfg.patents;
      if (!cfg.education.empty()) paths.education = cfg.education;
      if (!cfg.sectors.empty()) paths.sectors = cfg.sectors;
      tables = parse_tables(paths);
      inputs[cfg.employment] = fnv_file_hash(cfg.employment);
      inputs[cfg.occupations] = fnv_file_hash(cfg.occupations);
      inputs[cfg.io_table] = fnv_file_hash(cfg.io_table);
      if (!cfg.patents.empty()) inputs[cfg.patents] = fnv_file_hash(cfg.patents);
      if (!cfg.education.empty()) inputs[cfg.education] = fnv_file_hash(cfg.education);
      if (!cfg.sectors.empty()) inputs[cfg.sectors] = fnv_file_hash(cfg.sectors);
      return 0;
    });
  }
  summary.n_industries = tables.catalog.n_industries();
  summary.stages_run.push_back("ingest");

  // ---- proximity ----
  ProximityMatrix eg, lmat, iomat;
  std::optional<ProximityMatrix> kmat;
  if (plan.enabled("proximity")) {
    run_stage("proximity", [&] {
      eg = eg_index(tables.employment, cfg.x_share);
      lmat = labour_pooling(tables.occupations);
      iomat = io_proximity(tables.flows);
      const fs::path pdir = out / "proximity";
      write_proximity(pdir / "eg.csv", pdir / "eg_flags.json", tables.catalog, eg);
      write_proximity(pdir / "l.csv", pdir / "l_flags.json", tables.catalog, lmat);
      write_proximity(pdir / "io.csv", pdir / "io_flags.json", tables.catalog, iomat);
      if (tables.citations) {
        kmat = knowledge_proximity(*tables.citations);
        write_proximity(pdir / "k.csv", pdir / "k_flags.json", tables.catalog, *kmat);
      }
      return 0;
    });
    summary.stages_run.push_back("proximity");
  }

  // ---- network ----
  WeightedNetwork analyzed;
  bool have_network = false;
  if (plan.enabled("network")) {
    run_stage("network", [&] {
      if (eg.n() == 0) fail_input("proximity stage did not run");
      WeightedNetwork full = build_network(eg, tables.catalog, cfg.clip);
      const fs::path ndir = out / "network";
      write_edge_csv(ndir / "edges.csv", full);
      write_dot(ndir / "network.dot", full);
      write_dot(ndir / "top_edges.dot", top_fraction_subgraph(full, cfg.top_fraction));

      std::ostringstream nodes;
      nodes << "industry_id,component,degree\n";
      for (std::size_t i = 0; i < full.n(); ++i)
        nodes << full.node_ids[i] << "," << full.component_of[i] << ","
              << csv::format_number(full.degrees[i]) << "\n";
      csv::write_file(ndir / "nodes.csv", nodes.str());

      analyzed = largest_component(full);
      have_network = true;
      return 0;
    });
    summary.stages_run.push_back("network");
    summary.analyzed_nodes = analyzed.n();
  }

  // ---- communities ----
  SweepResult sr;
  PartitionSelection selection;
  std::vector<double> times;
  bool have_sweep = false;
  if (plan.enabled("communities")) {
    run_stage("communities", [&] {
      if (!have_network) fail_input("network stage did not run");
      times = parse_time_grid(cfg.times);
      TransitionSystem ts = transition_system(analyzed);

      SweepOptions opts;
      opts.repeats = cfg.repeats;
      opts.mode = cfg.mode;
      opts.seed = derive_seed(cfg.seed, "sweep");
      opts.workers = cfg.workers;
      opts.vi_pair_cap = cfg.vi_pair_cap;
      stage_seeds["sweep"] = opts.seed;
      sr = sweep(ts, times, opts);
      have_sweep = true;

      // shuffled-edge nulls: mean VI averaged across replicates per time
      std::vector<double> null_mean(times.size(), 0.0);
      if (cfg.nulls > 0) {
        json null_seeds = json::array();
        for (int rep = 0; rep < cfg.nulls; ++rep) {
          std::uint64_t nseed = derive_seed(cfg.seed, "null", rep);
          null_seeds.push_back(nseed);
          WeightedNetwork null_net =
              cfg.null_variant == NullVariant::ShuffleEdges
                  ? shuffle_null(analyzed, nseed)
                  : degree_preserving_null(analyzed, nseed);
          WeightedNetwork null_comp = largest_component(null_net);
          SweepOptions nopts = opts;
          nopts.seed = derive_seed(cfg.seed, "null-sweep", rep);
          SweepResult nsr = sweep(transition_system(null_comp), times, nopts);
          for (std::size_t i = 0; i < times.size(); ++i)
            null_mean[i] += nsr.points[i].mean_vi;
        }
        for (auto& v : null_mean) v /= cfg.nulls;
        stage_seeds["nulls"] = null_seeds;
      }

      const fs::path sdir = out / "stability";
      write_sweep_csv(sdir / "sweep.csv", sr, cfg.nulls > 0 ? null_mean : std::vector<double>{});

      selection = select_partitions(sr);
      for (const auto& sel : selection.earliest_k) {
        summary.detected_ks.push_back(sel.k);
        write_partition_json(sdir / "partitions" / ("P" + std::to_string(sel.k) + ".json"),
                             to_named_partition("P" + std::to_string(sel.k), sel.t, cfg.mode,
                                                sel.partition, analyzed.node_ids));
      }
      for (std::size_t i = 0; i < selection.vi_minima.size(); ++i) {
        const auto& sel = selection.vi_minima[i];
        std::string name = "vi_min_" + std::to_string(i);
        write_partition_json(sdir / "partitions" / (name + ".json"),
                             to_named_partition(name, sel.t, cfg.mode, sel.partition,
                                                analyzed.node_ids));
      }

      // external (sector) partition quality over the same grid
      if (tables.sectors) {
        std::map<std::string, std::uint32_t> sector_label;
        std::vector<std::uint32_t> labels(analyzed.n());
        std::set<std::string> all_sectors(tables.sectors->sector_of.begin(),
                                          tables.sectors->sector_of.end());
        for (std::size_t i = 0; i < analyzed.n(); ++i) {
          const std::string& sec =
              tables.sectors->sector_of[tables.catalog.industry_index.at(analyzed.node_ids[i])];
          auto [it, fresh] =
              sector_label.insert({sec, static_cast<std::uint32_t>(sector_label.size())});
          labels[i] = it->second;
          (void)fresh;
        }
        Partition sector_partition = Partition::from_labels(labels);
        auto scores = score_external_partition(ts, sector_partition, times, cfg.mode);
        std::ostringstream sout;
        sout << "t,r_detected,r_sector\n";
        for (std::size_t i = 0; i < times.size(); ++i)
          sout << csv::format_number(times[i]) << "," << csv::format_number(sr.points[i].r)
               << "," << csv::format_number(scores[i].r) << "\n";
        csv::write_file(sdir / "sector_stability.csv", sout.str());

        json sector_info;
        sector_info["sectors_total"] = all_sectors.size();
        sector_info["sectors_on_analyzed_component"] = sector_label.size();
        sector_info["sectors_dropped"] = all_sectors.size() - sector_label.size();
        csv::write_file(sdir / "sector_info.json", sector_info.dump(2) + "\n");
      }

      // independent sweeps for the remaining components when requested
      if (cfg.components == "all") {
        WeightedNetwork full = build_network(eg, tables.catalog, cfg.clip);
        std::vector<std::size_t> counts(full.n_components, 0);
        for (auto c : full.component_of) ++counts[c];
        // the largest component (ties to the lowest index) is the one the
        // main sweep already covered
        std::size_t main_comp = 0;
        for (std::size_t c = 1; c < counts.size(); ++c)
          if (counts[c] > counts[main_comp]) main_comp = c;
        for (std::size_t comp = 0; comp < full.n_components; ++comp) {
          if (comp == main_comp || counts[comp] < 3) continue;
          std::vector<std::size_t> keep;
          for (std::size_t i = 0; i < full.n(); ++i)
            if (full.component_of[i] == comp) keep.push_back(i);
          Matrix w(keep.size(), keep.size());
          std::vector<std::string> ids;
          for (std::size_t a = 0; a < keep.size(); ++a) {
            ids.push_back(full.node_ids[keep[a]]);
            for (std::size_t b = 0; b < keep.size(); ++b)
              w(a, b) = full.weights(keep[a], keep[b]);
          }
          WeightedNetwork sub = network_from_weights(std::move(w), std::move(ids));
          SweepOptions copts = opts;
          copts.seed = derive_seed(cfg.seed, "component-sweep", comp);
          SweepResult csr = sweep(transition_system(sub), times, copts);
          write_sweep_csv(sdir / "components" / ("component_" + std::to_string(comp)) /
                              "sweep.csv",
                          csr, {});
        }
      }
      return 0;
    });
    summary.stages_run.push_back("communities");
  }

  // ---- regress ----
  // community-level estimates per P_k feed both the estimates CSV and the
  // dendrogram annotations, and later the education regressions
  struct LevelEstimates {
    std::uint32_t k = 0;
    double t = 0.0;
    std::vector<std::vector<std::size_t>> communities;  // catalog indices
    std::vector<ChannelEstimate> l, io;
  };
  std::vector<LevelEstimates> level_estimates;
  if (plan.enabled("regress")) {
    run_stage("regress", [&] {
      if (!have_sweep) fail_input("communities stage did not run");
      std::vector<ChannelEstimate> all;
      std::vector<std::pair<Channel, const ProximityMatrix*>> channels = {
          {Channel::L, &lmat}, {Channel::IO, &iomat}};
      if (cfg.use_knowledge && kmat) channels.push_back({Channel::K, &*kmat});

      for (auto [ch, z] : channels) {
        (void)ch;
        all.push_back(global_regression(eg, *z));
        auto per_industry = industry_regression(eg, *z, tables.catalog);
        all.insert(all.end(), per_industry.begin(), per_industry.end());
      }

      // scatter of per-industry (beta_L, beta_IO)
      {
        auto bl = industry_regression(eg, lmat, tables.catalog);
        auto bio = industry_regression(eg, iomat, tables.catalog);
        std::ostringstream sc;
        sc << "industry_id,sector_id,beta_l,p_l,beta_io,p_io\n";
        for (std::size_t i = 0; i < bl.size(); ++i) {
          if (!bl[i].defined || !bio[i].defined) continue;
          std::string sector = tables.sectors ? tables.sectors->sector_of[i] : "";
          sc << tables.catalog.industry_id(i) << "," << sector << ","
             << csv::format_number(bl[i].fit.beta) << ","
             << csv::format_number(bl[i].fit.p_value) << ","
             << csv::format_number(bio[i].fit.beta) << ","
             << csv::format_number(bio[i].fit.p_value) << "\n";
        }
        csv::write_file(out / "channels" / "industry_scatter.csv", sc.str());
      }

      for (const auto& sel : selection.earliest_k) {
        if (sel.k < 2) continue;
        LevelEstimates le;
        le.k = sel.k;
        le.t = sel.t;
        NamedPartition np = to_named_partition("P" + std::to_string(sel.k), sel.t, cfg.mode,
                                               sel.partition, analyzed.node_ids);
        le.communities = communities_to_indices(np, tables.catalog);
        le.l = community_regression(eg, lmat, le.communities);
        le.io = community_regression(eg, iomat, le.communities);
        for (auto est : le.l) {
          est.scope_id = np.name + "." + est.scope_id;
          all.push_back(est);
        }
        for (auto est : le.io) {
          est.scope_id = np.name + "." + est.scope_id;
          all.push_back(est);
        }
        level_estimates.push_back(std::move(le));
      }

      write_estimates_csv(out / "channels" / "estimates.csv", all);

      json excluded = json::array();
      for (const auto& est : all)
        if (!est.defined) {
          json e;
          e["scope"] = scope_name(est.scope);
          e["scope_id"] = est.scope_id;
          e["channel"] = channel_name(est.channel);
          e["reason"] = est.reason;
          excluded.push_back(e);
        }
      json exc;
      exc["undefined_estimates"] = excluded;
      csv::write_file(out / "channels" / "excluded.json", exc.dump(2) + "\n");

      // dendrogram over the P_k levels, annotated with dominant channels
      std::vector<Dendrogram::Level> levels;
      for (const auto& sel : selection.earliest_k)
        levels.push_back({sel.t, sel.partition});
      if (!levels.empty()) {
        Dendrogram dend = build_dendrogram(levels);
        bool synthetic_root = dend.levels.size() != levels.size();

        json jd;
        jd["mode"] = mode_name(cfg.mode);
        json jlevels = json::array();
        for (std::size_t l = 0; l < dend.levels.size(); ++l) {
          const auto& lv = dend.levels[l];
          json jl;
          jl["k"] = lv.partition.k();
          if (std::isfinite(lv.t))
            jl["time"] = lv.t;
          else
            jl["time"] = nullptr;
          NamedPartition np = to_named_partition("", lv.t, cfg.mode, lv.partition,
                                                 analyzed.node_ids);
          jl["communities"] = np.communities;
          jlevels.push_back(jl);
        }
        jd["levels"] = jlevels;

        json jlinks = json::array();
        for (std::size_t l = 1; l < dend.levels.size(); ++l)
          for (std::uint32_t c = 0; c < dend.levels[l].partition.k(); ++c) {
            json jl;
            jl["level"] = l;
            jl["community"] = c;
            jl["parent"] = dend.parent[l][c];
            jlinks.push_back(jl);
          }
        jd["links"] = jlinks;

        json jann = json::array();
        std::ostringstream dot;
        dot << "digraph dendrogram {\n  rankdir=BT;\n  node [shape=box];\n";
        for (std::size_t l = 0; l < dend.levels.size(); ++l) {
          const Partition& part = dend.levels[l].partition;
          // find matching level estimates (by k); the root has none
          const LevelEstimates* le = nullptr;
          for (const auto& cand : level_estimates)
            if (cand.k == part.k()) le = &cand;
          auto sizes = part.community_sizes();
          for (std::uint32_t c = 0; c < part.k(); ++c) {
            std::string dom = "none";
            json ja;
            ja["level"] = l;
            ja["community"] = c;
            ja["size"] = sizes[c];
            if (le) {
              dom = dominant_channel(le->l[c], le->io[c], cfg.alpha);
              if (le->l[c].defined) {
                ja["beta_l"] = le->l[c].fit.beta;
                ja["p_l"] = le->l[c].fit.p_value;
              }
              if (le->io[c].defined) {
                ja["beta_io"] = le->io[c].fit.beta;
                ja["p_io"] = le->io[c].fit.p_value;
              }
            }
            ja["dominant"] = dom;
            jann.push_back(ja);
            dot << "  \"L" << l << "c" << c << "\" [label=\"k=" << part.k() << " c" << c
                << "\\nn=" << sizes[c] << "\\n" << dom << "\"];\n";
            if (l > 0)
              dot << "  \"L" << l << "c" << c << "\" -> \"L" << (l - 1) << "c"
                  << dend.parent[l][c] << "\";\n";
          }
        }
        dot << "}\n";
        jd["annotations"] = jann;
        jd["synthetic_root"] = synthetic_root;
        csv::write_file(out / "stability" / "dendrogram.json", jd.dump(2) + "\n");
        csv::write_file(out / "stability" / "dendrogram.dot", dot.str());
      }
      return 0;
    });
    summary.stages_run.push_back("regress");
  }

  // ---- education ----
  bool education_possible = tables.education.has_value();
  if (plan.enabled("education") && (education_possible || plan.required("education"))) {
    run_stage("education", [&] {
      if (!tables.education) fail_input("education table missing");
      if (level_estimates.empty()) fail_input("no community estimates (regress stage first)");

      std::vector<CommunityChannelRow> rows;
      std::ostringstream scatter;
      scatter << "partition,community,size,ed,beta_l,p_l,beta_io,p_io\n";
      for (const auto& le : level_estimates) {
        auto ed = community_mean_education(*tables.education, le.communities,
                                           cfg.edu_weighted,
                                           cfg.edu_weighted ? &tables.employment : nullptr);
        for (std::size_t c = 0; c < le.communities.size(); ++c) {
          CommunityChannelRow row;
          row.partition_id = "P" + std::to_string(le.k);
          row.community = static_cast<std::uint32_t>(c);
          row.size = le.communities[c].size();
          row.defined_l = le.l[c].defined;
          row.defined_io = le.io[c].defined;
          if (row.defined_l) {
            row.beta_l = le.l[c].fit.beta;
            row.p_l = le.l[c].fit.p_value;
          }
          if (row.defined_io) {
            row.beta_io = le.io[c].fit.beta;
            row.p_io = le.io[c].fit.p_value;
          }
          row.has_ed = !std::isnan(ed[c]);
          if (row.has_ed) row.ed = ed[c];
          rows.push_back(row);
          if (row.has_ed && row.defined_l && row.defined_io)
            scatter << row.partition_id << "," << c << "," << row.size << ","
                    << csv::format_number(row.ed) << "," << csv::format_number(row.beta_l)
                    << "," << csv::format_number(row.p_l) << ","
                    << csv::format_number(row.beta_io) << "," << csv::format_number(row.p_io)
                    << "\n";
        }
      }
      csv::write_file(out / "channels" / "education_scatter.csv", scatter.str());

      std::vector<WeightScheme> schemes;
      if (cfg.weighting == "all")
        schemes = {WeightScheme::OLS, WeightScheme::WLSI, WeightScheme::WLSII};
      else if (cfg.weighting == "ols")
        schemes = {WeightScheme::OLS};
      else if (cfg.weighting == "wlsi")
        schemes = {WeightScheme::WLSI};
      else
        schemes = {WeightScheme::WLSII};

      std::ostringstream fits;
      fits << "scheme,zeroing,channel,b,se,t,p,r2,n,defined,reason\n";
      for (auto scheme : schemes)
        for (auto zeroing : {Zeroing::None, Zeroing::At10pct, Zeroing::At5pct})
          for (auto channel : {EduChannel::L, EduChannel::IO, EduChannel::Diff}) {
            fits << weight_scheme_name(scheme) << "," << zeroing_name(zeroing) << ","
                 << edu_channel_name(channel) << ",";
            try {
              EducationFit fit = education_regression(rows, scheme, zeroing, channel);
              fits << csv::format_number(fit.fit.beta) << "," << csv::format_number(fit.fit.se)
                   << "," << csv::format_number(fit.fit.t_stat) << ","
                   << csv::format_number(fit.fit.p_value) << ","
                   << csv::format_number(fit.fit.r2) << "," << fit.fit.n << ",true,\n";
            } catch (const Error& e) {
              fits << ",,,,,0,false," << e.what() << "\n";
            }
          }
      csv::write_file(out / "channels" / "education_fits.csv", fits.str());

      std::ostringstream pfits;
      pfits << "partition,channel,b,se,n,defined,reason\n";
      for (const auto& pf : per_partition_education_fits(rows)) {
        pfits << pf.partition_id << "," << edu_channel_name(pf.channel) << ",";
        if (pf.defined)
          pfits << csv::format_number(pf.fit.beta) << "," << csv::format_number(pf.fit.se)
                << "," << pf.fit.n << ",true,\n";
        else
          pfits << ",,0,false," << pf.reason << "\n";
      }
      csv::write_file(out / "channels" / "education_partition_fits.csv", pfits.str());
      return 0;
    });
    summary.stages_run.push_back("education");
  }

  // ---- manifest ----
  manifest["stage_seeds"] = stage_seeds;
  manifest["inputs"] = inputs;
  manifest["stages"] = summary.stages_run;
  json outputs = json::object();
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(out))
    if (entry.is_regular_file() && entry.path().filename() != "manifest.json")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files)
    outputs[fs::relative(f, out).generic_string()] = fnv_file_hash(f);
  manifest["outputs"] = outputs;
  csv::write_file(out / "manifest.json", manifest.dump(2) + "\n");

  summary.out_dir = out;
  return summary;
}

}  // namespace agglom

// Command-line front end: one subcommand per pipeline stage plus the
// synthetic generator and the end-to-end runner. Stages communicate through
// the CSV/JSON files documented in the README.
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "agglom/csv.hpp"
#include "agglom/error.hpp"
#include "agglom/pipeline.hpp"
#include "agglom/rng.hpp"

namespace fs = std::filesystem;
using namespace agglom;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitNumeric = 2;
constexpr int kExitDegenerate = 3;

int exit_code(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::Input:
      return kExitInput;
    case ErrorKind::Numeric:
      return kExitNumeric;
    case ErrorKind::Degenerate:
      return kExitDegenerate;
  }
  return kExitNumeric;
}

struct CliOptions {
  RunConfig cfg;
  std::string config_file;

  // subcommand-specific inputs
  std::string eg_csv, l_csv, io_csv, k_csv;
  std::string edges_csv;
  std::string partition_json;
  std::string education_csv;
  std::string sectors_csv;
};

void add_pipeline_flags(CLI::App* sub, CliOptions& opt) {
  sub->add_option("--config", opt.config_file, "flat key=value config file");
  sub->add_option("--seed", opt.cfg.seed, "master seed; all stage seeds derive from it");
  sub->add_option("--mode", opt.cfg.mode,
                  "diffusion mode: continuous | discrete")
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, Mode>{{"continuous", Mode::Continuous},
                                      {"discrete", Mode::Discrete}}));
  sub->add_option("--times", opt.cfg.times, "Markov time grid: min:max:points or comma list");
  sub->add_option("--repeats", opt.cfg.repeats, "Louvain runs per Markov time");
  sub->add_option("--nulls", opt.cfg.nulls, "number of shuffled-network replicas");
  sub->add_option("--null-variant", opt.cfg.null_variant,
                  "null model: shuffle (edge resampling) | degree-preserving")
      ->transform(CLI::CheckedTransformer(std::map<std::string, NullVariant>{
          {"shuffle", NullVariant::ShuffleEdges},
          {"degree-preserving", NullVariant::DegreePreserving}}));
  sub->add_option("--clip", opt.cfg.clip, "negative-weight policy: clip | shift-min | abs")
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, ClipPolicy>{{"clip", ClipPolicy::Clip},
                                            {"shift-min", ClipPolicy::ShiftMin},
                                            {"abs", ClipPolicy::Abs}}));
  sub->add_option("--alpha", opt.cfg.alpha, "significance level for annotations/zeroing");
  sub->add_option("--weighting", opt.cfg.weighting,
                  "education weighting schemes to fit: all | ols | wlsi | wlsii");
  sub->add_option("--workers", opt.cfg.workers, "parallel Louvain workers");
  sub->add_option("--out", opt.cfg.out, "output directory");
}

void write_synthetic_tables(const RunConfig& cfg, const fs::path& out,
                            std::optional<std::size_t> n_industries) {
  SyntheticSpec spec = synthetic_spec_from_config(cfg);
  spec.n_industries = n_industries;  // cross-checked against the cluster sizes
  SyntheticEconomy eco = generate_synthetic_economy(spec);
  write_employment(out / "employment.csv", eco.tables.catalog, eco.tables.employment);
  write_occupations(out / "occupations.csv", eco.tables.catalog, eco.tables.occupations);
  write_flows(out / "io_table.csv", eco.tables.catalog, eco.tables.flows);
  write_citations(out / "patents.csv", eco.tables.catalog, *eco.tables.citations);
  write_education(out / "education.csv", eco.tables.catalog, *eco.tables.education);
  write_sectors(out / "sectors.csv", eco.tables.catalog, *eco.tables.sectors);

  nlohmann::json gt;
  gt["regimes"] = nlohmann::json::array();
  for (auto r : eco.regimes) gt["regimes"].push_back(regime_name(r));
  nlohmann::json jc = nlohmann::json::array();
  for (const auto& members : eco.ground_truth.communities()) {
    nlohmann::json ids = nlohmann::json::array();
    for (auto i : members) ids.push_back(eco.tables.catalog.industry_id(i));
    jc.push_back(ids);
  }
  gt["clusters"] = jc;
  csv::write_file(out / "ground_truth.json", gt.dump(2) + "\n");
  std::cout << "wrote synthetic tables for " << eco.tables.catalog.n_industries()
            << " industries to " << out.string() << "\n";
}

int run_proximity_cmd(const CliOptions& opt) {
  TablePaths paths;
  paths.employment = opt.cfg.employment;
  paths.occupations = opt.cfg.occupations;
  paths.io_table = opt.cfg.io_table;
  if (!opt.cfg.patents.empty()) paths.patents = opt.cfg.patents;
  TableSet tables = parse_tables(paths);
  fs::path out = opt.cfg.out;
  ProximityMatrix eg = eg_index(tables.employment, opt.cfg.x_share);
  write_proximity(out / "eg.csv", out / "eg_flags.json", tables.catalog, eg);
  ProximityMatrix l = labour_pooling(tables.occupations);
  write_proximity(out / "l.csv", out / "l_flags.json", tables.catalog, l);
  ProximityMatrix io = io_proximity(tables.flows);
  write_proximity(out / "io.csv", out / "io_flags.json", tables.catalog, io);
  if (tables.citations) {
    ProximityMatrix k = knowledge_proximity(*tables.citations);
    write_proximity(out / "k.csv", out / "k_flags.json", tables.catalog, k);
  }
  std::cout << "proximity matrices for " << tables.catalog.n_industries() << " industries -> "
            << out.string() << "\n";
  return kExitOk;
}

int run_network_cmd(const CliOptions& opt) {
  IndustryCatalog catalog =
      catalog_from_pair_csv(opt.eg_csv, {"industry_i", "industry_j", "value"});
  ProximityMatrix eg = read_proximity(opt.eg_csv, Channel::EG, catalog);
  WeightedNetwork net = build_network(eg, catalog, opt.cfg.clip);
  fs::path out = opt.cfg.out;
  write_edge_csv(out / "edges.csv", net);
  write_dot(out / "network.dot", net);
  write_dot(out / "top_edges.dot", top_fraction_subgraph(net, opt.cfg.top_fraction));
  std::ostringstream nodes;
  nodes << "industry_id,component,degree\n";
  for (std::size_t i = 0; i < net.n(); ++i)
    nodes << net.node_ids[i] << "," << net.component_of[i] << ","
          << csv::format_number(net.degrees[i]) << "\n";
  csv::write_file(out / "nodes.csv", nodes.str());
  std::cout << "network with " << net.n() << " nodes, " << net.edge_count() << " edges, "
            << net.n_components << " component(s) -> " << out.string() << "\n";
  return kExitOk;
}

int run_communities_cmd(const CliOptions& opt) {
  WeightedNetwork net = read_edge_csv(opt.edges_csv);
  WeightedNetwork analyzed = largest_component(net);
  TransitionSystem ts = transition_system(analyzed);
  auto times = parse_time_grid(opt.cfg.times);

  SweepOptions opts;
  opts.repeats = opt.cfg.repeats;
  opts.mode = opt.cfg.mode;
  opts.seed = derive_seed(opt.cfg.seed, "sweep");
  opts.workers = opt.cfg.workers;
  opts.vi_pair_cap = opt.cfg.vi_pair_cap;
  SweepResult sr = sweep(ts, times, opts);

  std::vector<double> null_mean;
  if (opt.cfg.nulls > 0) {
    null_mean.assign(times.size(), 0.0);
    for (int rep = 0; rep < opt.cfg.nulls; ++rep) {
      std::uint64_t nseed = derive_seed(opt.cfg.seed, "null", rep);
      WeightedNetwork null_net = opt.cfg.null_variant == NullVariant::ShuffleEdges
                                     ? shuffle_null(analyzed, nseed)
                                     : degree_preserving_null(analyzed, nseed);
      SweepOptions nopts = opts;
      nopts.seed = derive_seed(opt.cfg.seed, "null-sweep", rep);
      SweepResult nsr = sweep(transition_system(largest_component(null_net)), times, nopts);
      for (std::size_t i = 0; i < times.size(); ++i) null_mean[i] += nsr.points[i].mean_vi;
    }
    for (auto& v : null_mean) v /= opt.cfg.nulls;
  }

  fs::path out = opt.cfg.out;
  write_sweep_csv(out / "sweep.csv", sr, null_mean);
  PartitionSelection sel = select_partitions(sr);
  for (const auto& s : sel.earliest_k)
    write_partition_json(out / "partitions" / ("P" + std::to_string(s.k) + ".json"),
                         to_named_partition("P" + std::to_string(s.k), s.t, opt.cfg.mode,
                                            s.partition, analyzed.node_ids));
  for (std::size_t i = 0; i < sel.vi_minima.size(); ++i) {
    const auto& s = sel.vi_minima[i];
    std::string name = "vi_min_" + std::to_string(i);
    write_partition_json(out / "partitions" / (name + ".json"),
                         to_named_partition(name, s.t, opt.cfg.mode, s.partition,
                                            analyzed.node_ids));
  }
  std::cout << "sweep over " << times.size() << " times (" << mode_name(opt.cfg.mode) << ", "
            << opt.cfg.repeats << " repeats) on " << analyzed.n() << " nodes -> "
            << out.string() << "\n";
  return kExitOk;
}

int run_regress_cmd(const CliOptions& opt) {
  IndustryCatalog catalog =
      catalog_from_pair_csv(opt.eg_csv, {"industry_i", "industry_j", "value"});
  ProximityMatrix eg = read_proximity(opt.eg_csv, Channel::EG, catalog);
  ProximityMatrix l = read_proximity(opt.l_csv, Channel::L, catalog);
  ProximityMatrix io = read_proximity(opt.io_csv, Channel::IO, catalog);

  std::vector<ChannelEstimate> all;
  for (const ProximityMatrix* z : {&l, &io}) {
    all.push_back(global_regression(eg, *z));
    auto per_industry = industry_regression(eg, *z, catalog);
    all.insert(all.end(), per_industry.begin(), per_industry.end());
  }
  if (!opt.k_csv.empty()) {
    ProximityMatrix k = read_proximity(opt.k_csv, Channel::K, catalog);
    all.push_back(global_regression(eg, k));
    auto per_industry = industry_regression(eg, k, catalog);
    all.insert(all.end(), per_industry.begin(), per_industry.end());
  }

  if (!opt.partition_json.empty()) {
    NamedPartition np = read_partition_json(opt.partition_json);
    auto communities = communities_to_indices(np, catalog);
    for (const ProximityMatrix* z : {&l, &io}) {
      for (auto est : community_regression(eg, *z, communities)) {
        est.scope_id = np.name + "." + est.scope_id;
        all.push_back(est);
      }
    }
  }

  fs::path out = opt.cfg.out;
  write_estimates_csv(out / "estimates.csv", all);
  std::size_t undefined = 0;
  for (const auto& est : all) undefined += est.defined ? 0 : 1;
  std::cout << "wrote " << (all.size() - undefined) << " estimates (" << undefined
            << " undefined) -> " << (out / "estimates.csv").string() << "\n";
  return kExitOk;
}

int run_education_cmd(const CliOptions& opt, const std::vector<std::string>& partition_files) {
  IndustryCatalog catalog =
      catalog_from_pair_csv(opt.eg_csv, {"industry_i", "industry_j", "value"});
  ProximityMatrix eg = read_proximity(opt.eg_csv, Channel::EG, catalog);
  ProximityMatrix l = read_proximity(opt.l_csv, Channel::L, catalog);
  ProximityMatrix io = read_proximity(opt.io_csv, Channel::IO, catalog);

  auto rows_csv = csv::read(opt.education_csv, {"industry_id", "mean_years_education"});
  EducationTable edu;
  edu.years.assign(catalog.n_industries(), std::numeric_limits<double>::quiet_NaN());
  for (const auto& r : rows_csv) {
    auto it = catalog.industry_index.find(r.fields[0]);
    if (it == catalog.industry_index.end()) continue;  // industry outside this analysis
    edu.years[it->second] = csv::parse_number(r.fields[1], opt.education_csv, r.line);
  }

  if (partition_files.empty()) fail_input("education: no partition files given");
  std::vector<CommunityChannelRow> rows;
  for (const auto& pf : partition_files) {
    NamedPartition np = read_partition_json(pf);
    auto communities = communities_to_indices(np, catalog);
    auto bl = community_regression(eg, l, communities);
    auto bio = community_regression(eg, io, communities);
    auto ed = community_mean_education(edu, communities);
    for (std::size_t c = 0; c < communities.size(); ++c) {
      CommunityChannelRow row;
      row.partition_id = np.name;
      row.community = static_cast<std::uint32_t>(c);
      row.size = communities[c].size();
      row.defined_l = bl[c].defined;
      row.defined_io = bio[c].defined;
      if (row.defined_l) {
        row.beta_l = bl[c].fit.beta;
        row.p_l = bl[c].fit.p_value;
      }
      if (row.defined_io) {
        row.beta_io = bio[c].fit.beta;
        row.p_io = bio[c].fit.p_value;
      }
      row.has_ed = !std::isnan(ed[c]);
      if (row.has_ed) row.ed = ed[c];
      rows.push_back(row);
    }
  }

  std::vector<WeightScheme> schemes;
  if (opt.cfg.weighting == "all")
    schemes = {WeightScheme::OLS, WeightScheme::WLSI, WeightScheme::WLSII};
  else if (opt.cfg.weighting == "ols")
    schemes = {WeightScheme::OLS};
  else if (opt.cfg.weighting == "wlsi")
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
               << csv::format_number(fit.fit.p_value) << "," << csv::format_number(fit.fit.r2)
               << "," << fit.fit.n << ",true,\n";
        } catch (const Error& e) {
          fits << ",,,,,0,false," << e.what() << "\n";
        }
      }
  fs::path out = opt.cfg.out;
  csv::write_file(out / "education_fits.csv", fits.str());
  std::cout << "education fits over " << rows.size() << " pooled communities -> "
            << (out / "education_fits.csv").string() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"industry co-agglomeration analysis: proximity matrices, multiscale "
               "communities, and Marshallian channel estimates"};
  app.require_subcommand(1);

  CliOptions opt;
  std::vector<std::string> partition_files;

  auto* synth = app.add_subcommand("synth", "generate a synthetic economy table set");
  synth->add_option("--seed", opt.cfg.seed, "generator seed");
  synth->add_option("--clusters", opt.cfg.clusters, "cluster sizes, e.g. 10,10");
  synth->add_option("--regimes", opt.cfg.regimes, "per-cluster regime: labour|io list");
  std::optional<std::size_t> synth_industries;
  synth->add_option("--n-industries", synth_industries,
                    "cross-check: total industries (must match cluster sizes)");
  synth->add_option("--regions", opt.cfg.synth_regions, "region count");
  synth->add_option("--occupations", opt.cfg.synth_occupations, "occupation count");
  synth->add_option("--out", opt.cfg.out, "output directory");

  auto* prox = app.add_subcommand("proximity", "compute the four proximity matrices");
  prox->add_option("--employment", opt.cfg.employment, "employment.csv")->required();
  prox->add_option("--occupations", opt.cfg.occupations, "occupations.csv")->required();
  prox->add_option("--io-table", opt.cfg.io_table, "io_table.csv")->required();
  prox->add_option("--patents", opt.cfg.patents, "patents.csv (optional)");
  prox->add_option("--x-share", opt.cfg.x_share,
                   "x_r reading: total (region share of all employment) | mean (over industries)")
      ->transform(CLI::CheckedTransformer(std::map<std::string, RegionShareMode>{
          {"total", RegionShareMode::TotalEmployment},
          {"mean", RegionShareMode::MeanOverIndustries}}));
  prox->add_option("--out", opt.cfg.out, "output directory");

  auto* net = app.add_subcommand("network", "build the co-agglomeration network from eg.csv");
  net->add_option("--eg", opt.eg_csv, "eg proximity CSV")->required();
  net->add_option("--clip", opt.cfg.clip, "negative-weight policy: clip | shift-min | abs")
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, ClipPolicy>{{"clip", ClipPolicy::Clip},
                                            {"shift-min", ClipPolicy::ShiftMin},
                                            {"abs", ClipPolicy::Abs}}));
  net->add_option("--top-fraction", opt.cfg.top_fraction,
                  "fraction of largest edges kept in top_edges.dot");
  net->add_option("--out", opt.cfg.out, "output directory");

  auto* comm = app.add_subcommand("communities",
                                  "multiscale community detection on an edge list");
  comm->add_option("--edges", opt.edges_csv, "edges.csv from the network stage")->required();
  comm->add_option("--seed", opt.cfg.seed, "master seed");
  comm->add_option("--mode", opt.cfg.mode, "continuous | discrete")
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, Mode>{{"continuous", Mode::Continuous},
                                      {"discrete", Mode::Discrete}}));
  comm->add_option("--times", opt.cfg.times, "Markov time grid: min:max:points or comma list");
  comm->add_option("--repeats", opt.cfg.repeats, "Louvain runs per time");
  comm->add_option("--nulls", opt.cfg.nulls, "shuffled-network replicas");
  comm->add_option("--null-variant", opt.cfg.null_variant,
                   "shuffle | degree-preserving")
      ->transform(CLI::CheckedTransformer(std::map<std::string, NullVariant>{
          {"shuffle", NullVariant::ShuffleEdges},
          {"degree-preserving", NullVariant::DegreePreserving}}));
  comm->add_option("--workers", opt.cfg.workers, "parallel Louvain workers");
  comm->add_option("--out", opt.cfg.out, "output directory");

  auto* reg = app.add_subcommand("regress", "channel regressions at global/industry/community scope");
  reg->add_option("--eg", opt.eg_csv, "eg proximity CSV")->required();
  reg->add_option("--l", opt.l_csv, "labour proximity CSV")->required();
  reg->add_option("--io", opt.io_csv, "io proximity CSV")->required();
  reg->add_option("--k", opt.k_csv, "knowledge proximity CSV (optional)");
  reg->add_option("--partition", opt.partition_json, "partition JSON for community scope");
  reg->add_option("--out", opt.cfg.out, "output directory");

  auto* edu = app.add_subcommand("education", "pooled education regressions over partitions");
  edu->add_option("--eg", opt.eg_csv, "eg proximity CSV")->required();
  edu->add_option("--l", opt.l_csv, "labour proximity CSV")->required();
  edu->add_option("--io", opt.io_csv, "io proximity CSV")->required();
  edu->add_option("--education", opt.education_csv, "education.csv")->required();
  edu->add_option("--partition", partition_files, "partition JSON (repeatable)")->required();
  edu->add_option("--weighting", opt.cfg.weighting, "all | ols | wlsi | wlsii");
  edu->add_option("--alpha", opt.cfg.alpha, "significance level");
  edu->add_option("--out", opt.cfg.out, "output directory");

  auto* pipe = app.add_subcommand("pipeline", "run every stage end to end");
  add_pipeline_flags(pipe, opt);
  pipe->add_option("--employment", opt.cfg.employment, "employment.csv");
  pipe->add_option("--occupations", opt.cfg.occupations, "occupations.csv");
  pipe->add_option("--io-table", opt.cfg.io_table, "io_table.csv");
  pipe->add_option("--patents", opt.cfg.patents, "patents.csv");
  pipe->add_option("--education", opt.cfg.education, "education.csv");
  pipe->add_option("--sectors", opt.cfg.sectors, "sectors.csv");
  pipe->add_flag("--synthetic", opt.cfg.synthetic, "generate a synthetic economy instead");
  pipe->add_option("--clusters", opt.cfg.clusters, "synthetic cluster sizes");
  pipe->add_option("--regimes", opt.cfg.regimes, "synthetic cluster regimes");
  pipe->add_option("--components", opt.cfg.components,
                   "stability scope: largest | all components");
  pipe->add_option("--stages", opt.cfg.stages, "auto or comma list of stages");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitInput;
  }

  try {
    if (synth->parsed()) {
      write_synthetic_tables(opt.cfg, opt.cfg.out, synth_industries);
      return kExitOk;
    }
    if (prox->parsed()) return run_proximity_cmd(opt);
    if (net->parsed()) return run_network_cmd(opt);
    if (comm->parsed()) return run_communities_cmd(opt);
    if (reg->parsed()) return run_regress_cmd(opt);
    if (edu->parsed()) return run_education_cmd(opt, partition_files);
    if (pipe->parsed()) {
      // config file fills everything the user did not pass explicitly
      if (!opt.config_file.empty()) {
        RunConfig merged;
        apply_config_file(merged, opt.config_file);
        auto keep = [&](const std::string& flag) { return pipe->count(flag) > 0; };
        if (keep("--seed")) merged.seed = opt.cfg.seed;
        if (keep("--mode")) merged.mode = opt.cfg.mode;
        if (keep("--times")) merged.times = opt.cfg.times;
        if (keep("--repeats")) merged.repeats = opt.cfg.repeats;
        if (keep("--nulls")) merged.nulls = opt.cfg.nulls;
        if (keep("--null-variant")) merged.null_variant = opt.cfg.null_variant;
        if (keep("--clip")) merged.clip = opt.cfg.clip;
        if (keep("--alpha")) merged.alpha = opt.cfg.alpha;
        if (keep("--weighting")) merged.weighting = opt.cfg.weighting;
        if (keep("--workers")) merged.workers = opt.cfg.workers;
        if (keep("--out")) merged.out = opt.cfg.out;
        if (keep("--employment")) merged.employment = opt.cfg.employment;
        if (keep("--occupations")) merged.occupations = opt.cfg.occupations;
        if (keep("--io-table")) merged.io_table = opt.cfg.io_table;
        if (keep("--patents")) merged.patents = opt.cfg.patents;
        if (keep("--education")) merged.education = opt.cfg.education;
        if (keep("--sectors")) merged.sectors = opt.cfg.sectors;
        if (keep("--synthetic")) merged.synthetic = opt.cfg.synthetic;
        if (keep("--clusters")) merged.clusters = opt.cfg.clusters;
        if (keep("--regimes")) merged.regimes = opt.cfg.regimes;
        if (keep("--components")) merged.components = opt.cfg.components;
        if (keep("--stages")) merged.stages = opt.cfg.stages;
        opt.cfg = merged;
      }
      PipelineSummary s = run_pipeline(opt.cfg);
      std::cout << "pipeline finished: " << s.n_industries << " industries, "
                << s.analyzed_nodes << " analyzed nodes";
      if (!s.detected_ks.empty()) {
        std::cout << ", detected k in {";
        for (std::size_t i = 0; i < s.detected_ks.size(); ++i)
          std::cout << (i ? "," : "") << s.detected_ks[i];
        std::cout << "}";
      }
      std::cout << " -> " << s.out_dir.string() << "\n";
      return kExitOk;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return kExitInput;
}

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "agglom/channels.hpp"
#include "agglom/ingest.hpp"
#include "agglom/network.hpp"
#include "agglom/stability.hpp"
#include "agglom/synthetic.hpp"

namespace agglom {

// Full configuration of a run. Serializable to a flat key=value file; a
// persisted config replays a run bit-for-bit given identical inputs.
// Precedence: CLI flags > config file > defaults.
struct RunConfig {
  // inputs (CSV files; empty = absent)
  std::string employment;
  std::string occupations;
  std::string io_table;
  std::string patents;
  std::string education;
  std::string sectors;

  // synthetic economy (replaces file inputs when enabled)
  bool synthetic = false;
  std::string clusters = "10,10";
  std::string regimes = "labour,io";
  std::size_t synth_regions = 16;
  std::size_t synth_occupations = 30;

  // analysis
  std::uint64_t seed = 1;
  Mode mode = Mode::Continuous;
  std::string times = "1e-2:1e2:120";
  int repeats = 100;
  int nulls = 0;
  NullVariant null_variant = NullVariant::ShuffleEdges;
  ClipPolicy clip = ClipPolicy::Clip;
  double alpha = 0.05;                    // significance for zeroing/annotations
  std::string weighting = "all";          // all | ols | wlsi | wlsii
  int workers = 4;
  std::string components = "largest";     // largest | all
  RegionShareMode x_share = RegionShareMode::TotalEmployment;
  bool edu_weighted = false;
  bool use_knowledge = false;
  double top_fraction = 0.02;
  std::size_t vi_pair_cap = 256;
  std::string stages = "auto";            // auto | comma list
  std::string out = "run";
};

void apply_config_file(RunConfig& cfg, const std::filesystem::path& file);
std::string serialize_config(const RunConfig& cfg);

// Hash of the result-affecting configuration (out and workers excluded).
std::string config_hash(const RunConfig& cfg);

// "min:max:points" -> log-spaced grid, or an explicit comma list.
std::vector<double> parse_time_grid(const std::string& spec);

std::vector<std::size_t> parse_size_list(const std::string& spec);
std::vector<Regime> parse_regime_list(const std::string& spec);

SyntheticSpec synthetic_spec_from_config(const RunConfig& cfg);

// ---- file formats shared between pipeline stages and CLI subcommands ----

struct NamedPartition {
  std::string name;
  double time = 0.0;
  Mode mode = Mode::Continuous;
  std::vector<std::vector<std::string>> communities;  // industry ids
};

void write_partition_json(const std::filesystem::path& path, const NamedPartition& p);
NamedPartition read_partition_json(const std::filesystem::path& path);

NamedPartition to_named_partition(const std::string& name, double time, Mode mode,
                                  const Partition& p,
                                  const std::vector<std::string>& node_ids);

std::vector<std::vector<std::size_t>> communities_to_indices(const NamedPartition& p,
                                                             const IndustryCatalog& catalog);

void write_sweep_csv(const std::filesystem::path& path, const SweepResult& sr,
                     const std::vector<double>& null_mean_vi);

void write_estimates_csv(const std::filesystem::path& path,
                         const std::vector<ChannelEstimate>& estimates);

std::string fnv_file_hash(const std::filesystem::path& path);

struct PipelineSummary {
  std::filesystem::path out_dir;
  std::size_t n_industries = 0;
  std::size_t analyzed_nodes = 0;
  std::vector<std::uint32_t> detected_ks;
  std::vector<std::string> stages_run;
};

PipelineSummary run_pipeline(const RunConfig& cfg);

}  // namespace agglom

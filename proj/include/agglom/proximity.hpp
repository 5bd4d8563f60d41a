#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "agglom/tables.hpp"

namespace agglom {

enum class Channel { EG, L, IO, K };

const char* channel_name(Channel c);

// Symmetric industry x industry similarity for one channel. Diagonal entries
// are computed but excluded from every downstream pair enumeration. Undefined
// entries (zero-variance occupation rows) are NaN and listed per industry.
struct ProximityMatrix {
  Channel channel = Channel::EG;
  Matrix values;
  std::vector<std::size_t> undefined_industries;  // L only: zero-variance rows

  std::size_t n() const { return values.rows(); }
  bool defined(std::size_t i, std::size_t j) const {
    return !std::isnan(values(i, j));
  }
};

// Two readings of x_r in the co-agglomeration index; the region share of
// total employment is the default, the mean over industries of s_ir sits
// behind a flag.
enum class RegionShareMode { TotalEmployment, MeanOverIndustries };

ProximityMatrix eg_index(const EmploymentTable& emp,
                         RegionShareMode mode = RegionShareMode::TotalEmployment);
ProximityMatrix labour_pooling(const OccupationTable& occ);
ProximityMatrix io_proximity(const FlowTable& flows);
ProximityMatrix knowledge_proximity(const CitationTable& cites);

// Long-form CSV (unordered pairs, i < j in catalog order) plus a sidecar JSON
// listing excluded diagonals and undefined entries.
void write_proximity(const std::filesystem::path& csv_path,
                     const std::filesystem::path& sidecar_json_path,
                     const IndustryCatalog& catalog, const ProximityMatrix& m);

ProximityMatrix read_proximity(const std::filesystem::path& csv_path, Channel channel,
                               const IndustryCatalog& catalog);

// Rebuilds a catalog holding only industries (no regions/occupations) from
// the industry ids appearing in a long-form proximity/edge CSV.
IndustryCatalog catalog_from_pair_csv(const std::filesystem::path& csv_path,
                                      const std::vector<std::string>& header);

}  // namespace agglom

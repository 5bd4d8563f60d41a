#pragma once

#include <cmath>
#include <string>
#include <unordered_map>
#include <vector>

#include "agglom/matrix.hpp"

namespace agglom {

// Fixed index sets for an analysis run. Every matrix in the pipeline indexes
// against this catalog; orderings are lexicographic in the ids and never
// change after construction.
struct IndustryCatalog {
  struct Industry {
    std::string id;
    std::string display_name;
  };

  std::vector<Industry> industries;
  std::vector<std::string> regions;
  std::vector<std::string> occupations;

  std::unordered_map<std::string, std::size_t> industry_index;
  std::unordered_map<std::string, std::size_t> region_index;
  std::unordered_map<std::string, std::size_t> occupation_index;

  std::size_t n_industries() const { return industries.size(); }
  std::size_t n_regions() const { return regions.size(); }
  std::size_t n_occupations() const { return occupations.size(); }

  const std::string& industry_id(std::size_t i) const { return industries[i].id; }

  void rebuild_indices();
};

// industries x regions, employment counts
struct EmploymentTable {
  Matrix values;
};

// industries x occupations, employment counts
struct OccupationTable {
  Matrix values;
};

// industries x industries; (i, j) = value industry j sources from industry i
struct FlowTable {
  Matrix values;
};

// industries x industries, patent citation counts (citing -> cited)
struct CitationTable {
  Matrix values;
};

// mean years of education per industry; NaN where unknown
struct EducationTable {
  std::vector<double> years;

  bool has(std::size_t i) const { return !std::isnan(years[i]); }
};

// industry -> sector id, total over the catalog
struct SectorMap {
  std::vector<std::string> sector_of;
};

}  // namespace agglom

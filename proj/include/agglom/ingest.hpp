#pragma once

#include <filesystem>
#include <optional>

#include "agglom/tables.hpp"

namespace agglom {

// File locations for one table set. employment + occupations + io_table are
// required by the proximity stage; the rest are optional inputs.
struct TablePaths {
  std::filesystem::path employment;
  std::filesystem::path occupations;
  std::filesystem::path io_table;
  std::filesystem::path patents;    // optional
  std::filesystem::path education;  // optional
  std::filesystem::path sectors;    // optional
};

struct TableSet {
  IndustryCatalog catalog;
  EmploymentTable employment;
  OccupationTable occupations;
  FlowTable flows;
  std::optional<CitationTable> citations;
  std::optional<EducationTable> education;
  std::optional<SectorMap> sectors;
};

// Parses, validates and aligns all tables onto one catalog. The catalog's
// industry and region lists come from employment.csv; the occupation list
// from occupations.csv; ids are sorted lexicographically. Industries seen in
// any other table but absent from the catalog are rejected. Missing
// (industry, region/occupation/partner) combinations default to 0.
TableSet parse_tables(const TablePaths& paths);

// Single-table writers matching the CSV schemas (used by the synthetic
// generator and for round-trip tests). Zero entries are not emitted; they are
// re-established by the sparse-to-dense default on parse.
void write_employment(const std::filesystem::path&, const IndustryCatalog&, const EmploymentTable&);
void write_occupations(const std::filesystem::path&, const IndustryCatalog&, const OccupationTable&);
void write_flows(const std::filesystem::path&, const IndustryCatalog&, const FlowTable&);
void write_citations(const std::filesystem::path&, const IndustryCatalog&, const CitationTable&);
void write_education(const std::filesystem::path&, const IndustryCatalog&, const EducationTable&);
void write_sectors(const std::filesystem::path&, const IndustryCatalog&, const SectorMap&);

}  // namespace agglom

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "musel/dataset.hpp"
#include "musel/indicators.hpp"

namespace musel {

// Dataset directory layout: X_1.csv .. X_K.csv (n_k rows, p columns,
// headerless, comma-separated) and y_1.csv .. y_K.csv (single column).
// y files may be absent for SEM data. An optional manifest.json lists file
// paths and column names; without one the default names above are probed.

Mat read_csv_matrix(const std::filesystem::path& file);
void write_csv_matrix(const std::filesystem::path& file, const Mat& m);

struct DatasetManifest {
  int K = 0;
  std::vector<std::string> x_files;
  std::vector<std::string> y_files;        // may be empty
  std::vector<std::string> column_names;   // optional, length p
};

MultiTaskDataset load_dataset(const std::filesystem::path& dir);
DatasetManifest load_manifest(const std::filesystem::path& dir);
void save_dataset(const std::filesystem::path& dir, const MultiTaskDataset& data,
                  const std::vector<std::string>& column_names = {});

// Shortest round-trip decimal text for a double (std::to_chars), used for
// all numeric output so identical values always print identically.
std::string format_double(double v);

// Sparse (subset-bitmask, covariate) JSON form of an activation pattern,
// e.g. {"K":2,"p":5,"active":[[3,2],[1,4]]} with 1-based covariates.
std::string gamma_to_json(const GammaIndicator& gamma);
GammaIndicator gamma_from_json(const std::string& text);

}  // namespace musel

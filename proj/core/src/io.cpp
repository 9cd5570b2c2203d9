#include "musel/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace musel {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  check(ec == std::errc(), "format_double: conversion failed");
  return std::string(buf, ptr);
}

Mat read_csv_matrix(const fs::path& file) {
  std::ifstream in(file);
  check(in.good(), "cannot open " + file.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    const char* ptr = line.data();
    const char* end = line.data() + line.size();
    while (ptr <= end) {
      const char* comma = std::find(ptr, end, ',');
      double v = 0.0;
      auto [next, ec] = std::from_chars(ptr, comma, v);
      check(ec == std::errc() && next == comma,
            file.string() + ": bad numeric field in row " + std::to_string(rows.size() + 1));
      row.push_back(v);
      if (comma == end) break;
      ptr = comma + 1;
    }
    check(rows.empty() || row.size() == rows.front().size(),
          file.string() + ": inconsistent column count at row " + std::to_string(rows.size() + 1));
    rows.push_back(std::move(row));
  }
  check(!rows.empty(), file.string() + ": empty CSV");
  Mat m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows.front().size(); ++j)
      m(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  return m;
}

void write_csv_matrix(const fs::path& file, const Mat& m) {
  std::ofstream out(file);
  check(out.good(), "cannot write " + file.string());
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

DatasetManifest load_manifest(const fs::path& dir) {
  DatasetManifest mf;
  const fs::path file = dir / "manifest.json";
  if (fs::exists(file)) {
    std::ifstream in(file);
    json j = json::parse(in);
    mf.K = j.at("K").get<int>();
    mf.x_files = j.at("files").at("X").get<std::vector<std::string>>();
    if (j.at("files").contains("y")) mf.y_files = j["files"]["y"].get<std::vector<std::string>>();
    if (j.contains("columns")) mf.column_names = j["columns"].get<std::vector<std::string>>();
    check(static_cast<int>(mf.x_files.size()) == mf.K, "manifest.json: X file list length != K");
    check(mf.y_files.empty() || static_cast<int>(mf.y_files.size()) == mf.K,
          "manifest.json: y file list length != K");
    return mf;
  }
  // No manifest: probe the default names.
  for (int k = 1;; ++k) {
    const std::string xf = "X_" + std::to_string(k) + ".csv";
    if (!fs::exists(dir / xf)) break;
    mf.x_files.push_back(xf);
    const std::string yf = "y_" + std::to_string(k) + ".csv";
    if (fs::exists(dir / yf)) mf.y_files.push_back(yf);
  }
  mf.K = static_cast<int>(mf.x_files.size());
  check(mf.K >= 1, "no X_1.csv (or manifest.json) found in " + dir.string());
  check(mf.y_files.empty() || static_cast<int>(mf.y_files.size()) == mf.K,
        dir.string() + ": y_k.csv present for only some data sets");
  return mf;
}

MultiTaskDataset load_dataset(const fs::path& dir) {
  const DatasetManifest mf = load_manifest(dir);
  MultiTaskDataset data;
  for (int k = 0; k < mf.K; ++k) {
    data.X.push_back(read_csv_matrix(dir / mf.x_files[static_cast<std::size_t>(k)]));
    if (!mf.y_files.empty()) {
      Mat ym = read_csv_matrix(dir / mf.y_files[static_cast<std::size_t>(k)]);
      check(ym.cols() == 1, mf.y_files[static_cast<std::size_t>(k)] + ": expected a single column");
      data.y.push_back(ym.col(0));
    }
  }
  data.validate(/*require_responses=*/false);
  if (!data.y.empty()) data.validate(/*require_responses=*/true);
  return data;
}

void save_dataset(const fs::path& dir, const MultiTaskDataset& data,
                  const std::vector<std::string>& column_names) {
  fs::create_directories(dir);
  json files;
  std::vector<std::string> xf, yf;
  for (int k = 0; k < data.K(); ++k) {
    const std::string xn = "X_" + std::to_string(k + 1) + ".csv";
    write_csv_matrix(dir / xn, data.X[static_cast<std::size_t>(k)]);
    xf.push_back(xn);
    if (data.has_responses()) {
      const std::string yn = "y_" + std::to_string(k + 1) + ".csv";
      write_csv_matrix(dir / yn, data.y[static_cast<std::size_t>(k)]);
      yf.push_back(yn);
    }
  }
  json mf;
  mf["K"] = data.K();
  mf["files"]["X"] = xf;
  if (!yf.empty()) mf["files"]["y"] = yf;
  if (!column_names.empty()) {
    check(static_cast<Index>(column_names.size()) == data.p(),
          "save_dataset: column_names length != p");
    mf["columns"] = column_names;
  }
  std::ofstream out(dir / "manifest.json");
  out << mf.dump(2) << '\n';
}

std::string gamma_to_json(const GammaIndicator& gamma) {
  json j;
  j["K"] = gamma.K;
  j["p"] = gamma.p;
  json act = json::array();
  for (const auto& a : gamma.active)
    act.push_back(json::array({a.set.bits, a.j + 1}));  // 1-based covariate
  j["active"] = act;
  return j.dump();
}

GammaIndicator gamma_from_json(const std::string& text) {
  json j = json::parse(text);
  GammaIndicator g;
  g.K = j.at("K").get<int>();
  g.p = j.at("p").get<Index>();
  for (const auto& a : j.at("active")) {
    GammaActivation ga;
    ga.set.bits = a.at(0).get<std::uint32_t>();
    ga.j = a.at(1).get<Index>() - 1;
    g.active.push_back(ga);
  }
  std::sort(g.active.begin(), g.active.end(),
            [](const GammaActivation& x, const GammaActivation& y) { return x.j < y.j; });
  (void)gamma_to_r(g);  // validates
  return g;
}

}  // namespace musel

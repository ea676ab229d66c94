#pragma once

#include <rinclose/core.hpp>
#include <rinclose/io.hpp>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#ifndef RINCLOSE_TEST_DATA
#error "RINCLOSE_TEST_DATA must point at tests/data"
#endif

namespace testing_support {

using namespace rinclose;

inline std::filesystem::path data_path(const std::string& rel) {
  return std::filesystem::path(RINCLOSE_TEST_DATA) / rel;
}

/// Headerless comma-separated numeric matrix.
inline Matrix load_matrix(const std::string& rel) {
  ParseOptions opt;
  opt.header = false;
  return parse_dataset(data_path(rel), opt).data.matrix;
}

/// Golden list, one "r1,r2,...;c1,c2,..." per line with 1-based indices.
inline std::vector<Bicluster> load_golden(const std::string& rel) {
  std::ifstream in(data_path(rel));
  if (!in) throw std::runtime_error("missing golden file " + rel);
  std::vector<Bicluster> out;
  std::string line;
  auto parse = [](const std::string& s) {
    IndexSet v;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) v.push_back(static_cast<Index>(std::stoul(tok) - 1));
    std::sort(v.begin(), v.end());
    return v;
  };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto semi = line.find(';');
    out.push_back({parse(line.substr(0, semi)), parse(line.substr(semi + 1))});
  }
  return out;
}

inline BiclusterSolution as_solution(const std::vector<Bicluster>& bs) {
  BiclusterSolution s;
  for (const auto& b : bs) s.insert(b);
  return s;
}

/// 1-based literal to 0-based index set.
inline IndexSet idx(std::initializer_list<int> one_based) {
  IndexSet s;
  for (int v : one_based) s.push_back(static_cast<Index>(v - 1));
  std::sort(s.begin(), s.end());
  return s;
}

/// Two-column matrix where one candidate can be created from two parents.
inline Matrix two_parent_matrix(bool variant = false) {
  std::vector<double> c1 = {0, 0, 1, 1, 1, 2, 2};
  std::vector<double> c2 = {0, 5, 9, 9, 9, variant ? 9.0 : 5.0, 0};
  Matrix m(7, 2);
  for (std::size_t i = 0; i < 7; ++i) {
    m.set(i, 0, c1[i]);
    m.set(i, 1, c2[i]);
  }
  return m;
}

/// Emitted biclusters in emission order (duplicates kept).
inline std::vector<Bicluster> collect(const Matrix& mat, const EnumParams& p, EnumStats* stats = nullptr) {
  std::vector<Bicluster> out;
  auto st = enumerate_into(mat, p, [&](const IndexSet& r, const IndexSet& c) { out.push_back({r, c}); });
  if (stats) *stats = st;
  return out;
}

}  // namespace testing_support

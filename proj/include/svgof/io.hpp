#ifndef SVGOF_IO_HPP
#define SVGOF_IO_HPP

// CSV and report serialization. Floating-point values are rendered with
// 17 significant digits so exported paths re-ingest bit-identically.

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "svgof/simulate.hpp"
#include "svgof/statespace.hpp"

namespace svgof {

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_text_file(const std::string& file, const std::string& text) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot open for writing: " + file);
  out << text;
}

inline void write_path_csv(const std::string& file, const Path& path) {
  std::string text = path.has_latent() ? "t,r,sigma2\n" : "t,r\n";
  for (std::size_t i = 0; i < path.r.size(); ++i) {
    text += fmt17(path.t[i]);
    text += ',';
    text += fmt17(path.r[i]);
    if (path.has_latent()) {
      text += ',';
      text += fmt17(path.sigma2[i]);
    }
    text += '\n';
  }
  write_text_file(file, text);
}

inline void write_filter_csv(const std::string& file, const FilterOutput& f) {
  std::string text = "i,h_pred,P_pred,h_filt,P_filt,loglik_step\n";
  for (std::size_t i = 0; i < f.n; ++i) {
    text += std::to_string(i) + ',' + fmt17(f.h_pred[i]) + ',' +
            fmt17(f.P_pred[i]) + ',' + fmt17(f.h_filt[i]) + ',' +
            fmt17(f.P_filt[i]) + ',' + fmt17(f.loglik_step[i]) + '\n';
  }
  write_text_file(file, text);
}

// Flat key-value report, one `key = value` line each.
inline void write_kv_report(
    const std::string& file,
    const std::vector<std::pair<std::string, std::string>>& kv) {
  std::string text;
  for (const auto& [k, v] : kv) text += k + " = " + v + '\n';
  write_text_file(file, text);
}

inline void write_table_csv(const std::string& file,
                            const std::vector<std::string>& header,
                            const std::vector<std::vector<std::string>>& rows) {
  std::string text;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c) text += ',';
    text += header[c];
  }
  text += '\n';
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) text += ',';
      text += row[c];
    }
    text += '\n';
  }
  write_text_file(file, text);
}

}  // namespace svgof

#endif  // SVGOF_IO_HPP

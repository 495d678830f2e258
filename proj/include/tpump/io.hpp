#pragma once

// CSV writers for run artifacts. Numbers use the shortest round-trip form,
// so identical results give identical bytes.
//
//   series_pn.csv   t,n,P_n                          (long form, n = 0..L-1)
//   series_obs.csv  t,R,Var,A,B,peak,offset,R_sub,Var_sub

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <string>
#include <system_error>

#include "tpump/error.hpp"
#include "tpump/pipeline.hpp"

namespace tpump {

/// Shortest decimal that parses back to x; "nan" for NaN, "inf"/"-inf".
inline std::string fmt_num(double x) {
  if (std::isnan(x)) return "nan";
  if (x == 0.0) return "0";  // folds -0
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  if (r.ec != std::errc{}) throw NumericalError("fmt_num: conversion failed");
  return std::string(buf, r.ptr);
}

inline constexpr const char* pn_header = "t,n,P_n";
inline constexpr const char* obs_header = "t,R,Var,A,B,peak,offset,R_sub,Var_sub";

inline void write_pn_csv(std::ostream& os, const RunResult& res) {
  os << pn_header << '\n';
  for (std::size_t i = 0; i < res.P.size(); ++i) {
    const std::string t = fmt_num(res.times[i]);
    for (std::size_t n = 0; n < res.P[i].size(); ++n) os << t << ',' << n << ',' << fmt_num(res.P[i][n]) << '\n';
  }
}

inline void write_obs_csv(std::ostream& os, const RunResult& res) {
  os << obs_header << '\n';
  for (const auto& r : res.obs) {
    os << fmt_num(r.t) << ',' << fmt_num(r.R) << ',' << fmt_num(r.Var) << ',' << fmt_num(r.A) << ','
       << fmt_num(r.B) << ',' << r.peak << ',' << fmt_num(r.offset) << ',' << fmt_num(r.R_sub) << ','
       << fmt_num(r.Var_sub) << '\n';
  }
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + path);
  f << content;
  if (!f) throw ConfigError("write failed: " + path);
}

}  // namespace tpump

#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hawkescox/diagnostics.hpp"
#include "hawkescox/errors.hpp"
#include "hawkescox/mala.hpp"
#include "hawkescox/model.hpp"

// File formats. All writers are deterministic byte-for-byte: fixed field
// order, shortest round-trip decimal representation for floats.
//
//   counts.csv     header `index,count`; indices contiguous from 1
//   chain.csv      header `iter,a,sigma2,mu,b,theta[,c],logpost`
//   x_draws.csv    header `iter,x_1,...,x_N`, one row per stored draw
//   meta.json      config echo, seed, acceptance rates for a chain directory
//   summary.json   fit summary document (see README for the schema)
//   bands.csv      header `i,y,lambda_mean,lambda_lo,lambda_hi,background_mean,hawkes_mean`

namespace hawkescox {

struct EventList {
  std::vector<double> times;  // same unit as dt, sorted ascending
};

inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return s.substr(b, e - b);
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(trim(line.substr(start)));
      break;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return out;
}

inline double parse_double(const std::string& token, const std::string& path,
                           std::size_t line_no) {
  double v = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{} || res.ptr != last)
    throw DataError(path + ":" + std::to_string(line_no) + ": cannot parse '" +
                    token + "' as a number");
  return v;
}

inline long long parse_int(const std::string& token, const std::string& path,
                           std::size_t line_no) {
  long long v = 0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{} || res.ptr != last)
    throw DataError(path + ":" + std::to_string(line_no) + ": cannot parse '" +
                    token + "' as an integer");
  return v;
}

inline std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path + " for writing");
  return out;
}

inline void finish_write(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw DataError("failed while writing " + path);
}

// Days since 1970-01-01 of a proleptic Gregorian date.
inline long long days_from_civil(long long y, unsigned m, unsigned d) {
  y -= m <= 2;
  const long long era = (y >= 0 ? y : y - 399) / 400;
  const auto yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<long long>(doe) - 719468;
}

inline long long parse_iso_date(const std::string& token, const std::string& context) {
  if (token.size() != 10 || token[4] != '-' || token[7] != '-')
    throw DataError(context + ": expected an ISO-8601 date (YYYY-MM-DD), got '" +
                    token + "'");
  const long long y = parse_int(token.substr(0, 4), context, 0);
  const long long m = parse_int(token.substr(5, 2), context, 0);
  const long long d = parse_int(token.substr(8, 2), context, 0);
  if (m < 1 || m > 12 || d < 1 || d > 31)
    throw DataError(context + ": date '" + token + "' out of range");
  return days_from_civil(y, static_cast<unsigned>(m), static_cast<unsigned>(d));
}

}  // namespace detail

// Read a count series. Accepts a header `index,count` (indices contiguous
// from 1) or a single `count` column. The bin width is not stored in the
// file and must be supplied by the caller.
inline CountSeries read_counts(const std::string& path, double dt = 1.0) {
  const auto lines = detail::read_lines(path);
  if (lines.empty()) throw DataError(path + ": empty file");
  const auto header = detail::split_csv(lines[0]);
  bool indexed = false;
  if (header.size() == 2 && header[0] == "index" && header[1] == "count") {
    indexed = true;
  } else if (header.size() == 1 && header[0] == "count") {
    indexed = false;
  } else {
    throw DataError(path + ":1: expected header 'index,count' or 'count'");
  }

  CountSeries y;
  y.dt = dt;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty() && i + 1 == lines.size()) break;
    const auto fields = detail::split_csv(lines[i]);
    const std::size_t line_no = i + 1;
    if (fields.size() != (indexed ? 2u : 1u))
      throw DataError(path + ":" + std::to_string(line_no) + ": expected " +
                      (indexed ? "2" : "1") + " column(s), got " +
                      std::to_string(fields.size()));
    if (indexed) {
      const long long idx = detail::parse_int(fields[0], path, line_no);
      const long long expected = static_cast<long long>(y.counts.size()) + 1;
      if (idx != expected)
        throw DataError(path + ":" + std::to_string(line_no) + ": missing index " +
                        std::to_string(expected) + " (got " + std::to_string(idx) + ")");
    }
    const long long count = detail::parse_int(fields[indexed ? 1 : 0], path, line_no);
    if (count < 0)
      throw DataError(path + ":" + std::to_string(line_no) + ": negative count " +
                      std::to_string(count));
    y.counts.push_back(static_cast<int>(count));
  }
  if (y.counts.empty()) throw DataError(path + ": no data rows");
  return y;
}

inline void write_counts(const CountSeries& y, const std::string& path) {
  auto out = detail::open_out(path);
  out << "index,count\n";
  for (std::size_t i = 0; i < y.counts.size(); ++i)
    out << (i + 1) << ',' << y.counts[i] << '\n';
  detail::finish_write(out, path);
}

// Read raw event times from a CSV with a `time` column. Values are either
// real numbers (in the same unit as dt) or ISO-8601 dates; dates are mapped
// to fractional weeks from `origin_date`, which is required in that case.
// Times are sorted ascending on return.
inline EventList read_events(const std::string& path,
                             const std::optional<std::string>& origin_date = {}) {
  const auto lines = detail::read_lines(path);
  if (lines.empty()) throw DataError(path + ": empty file");
  const auto header = detail::split_csv(lines[0]);
  if (header.size() != 1 || header[0] != "time")
    throw DataError(path + ":1: expected header 'time'");

  std::optional<long long> origin_days;
  if (origin_date)
    origin_days = detail::parse_iso_date(*origin_date, "origin");

  EventList events;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty() && i + 1 == lines.size()) break;
    const std::string token = detail::trim(lines[i]);
    const std::size_t line_no = i + 1;
    double v = 0.0;
    const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
    if (res.ec == std::errc{} && res.ptr == token.data() + token.size()) {
      events.times.push_back(v);
      continue;
    }
    if (!origin_days)
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": ISO dates require --origin to be set");
    const long long days =
        detail::parse_iso_date(token, path + ":" + std::to_string(line_no));
    events.times.push_back(static_cast<double>(days - *origin_days) / 7.0);
  }
  if (events.times.empty()) throw DataError(path + ": no events");
  std::sort(events.times.begin(), events.times.end());
  return events;
}

// Bin events into counts with half-open bins [origin+(i-1)dt, origin+i*dt).
inline CountSeries bin_events(const EventList& events, double dt, double origin = 0.0) {
  if (!(dt > 0.0)) throw std::invalid_argument("bin_events: dt must be positive");
  if (events.times.empty()) throw DataError("bin_events: no events to bin");
  std::size_t n_bins = 0;
  for (double t : events.times) {
    if (t < origin)
      throw DataError("bin_events: event at " + format_double(t) +
                      " precedes origin " + format_double(origin));
    const auto idx = static_cast<std::size_t>((t - origin) / dt);
    n_bins = std::max(n_bins, idx + 1);
  }
  CountSeries y;
  y.dt = dt;
  y.counts.assign(n_bins, 0);
  for (double t : events.times)
    ++y.counts[static_cast<std::size_t>((t - origin) / dt)];
  return y;
}

namespace detail {

inline nlohmann::json config_json(const McmcConfig& config) {
  nlohmann::json j;
  j["iters"] = config.iters;
  j["burnin"] = config.burnin;
  j["eps_x"] = config.eps_x;
  j["eps_cox"] = config.eps_cox;
  j["eps_hawkes"] = config.eps_hawkes;
  j["eps_trend"] = config.eps_trend;
  j["thin_x"] = config.thin_x;
  j["seed"] = config.seed;
  j["trend"] = config.trend_enabled;
  j["update_x"] = config.update_x;
  j["update_cox"] = config.update_cox;
  j["update_hawkes"] = config.update_hawkes;
  return j;
}

inline McmcConfig config_from_json(const nlohmann::json& j) {
  McmcConfig config;
  config.iters = j.at("iters").get<std::size_t>();
  config.burnin = j.at("burnin").get<std::size_t>();
  config.eps_x = j.at("eps_x").get<double>();
  config.eps_cox = j.at("eps_cox").get<double>();
  config.eps_hawkes = j.at("eps_hawkes").get<double>();
  config.eps_trend = j.at("eps_trend").get<double>();
  config.thin_x = j.at("thin_x").get<std::size_t>();
  config.seed = j.at("seed").get<std::uint64_t>();
  config.trend_enabled = j.at("trend").get<bool>();
  config.update_x = j.at("update_x").get<bool>();
  config.update_cox = j.at("update_cox").get<bool>();
  config.update_hawkes = j.at("update_hawkes").get<bool>();
  return config;
}

}  // namespace detail

// Write a chain to `dir` as chain.csv + x_draws.csv + meta.json.
inline void write_chain(const ChainSamples& chain, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const bool trend = chain.config.trend_enabled;

  {
    const std::string path = dir + "/chain.csv";
    auto out = detail::open_out(path);
    out << (trend ? "iter,a,sigma2,mu,b,theta,c,logpost\n"
                  : "iter,a,sigma2,mu,b,theta,logpost\n");
    for (const ParamDraw& d : chain.param_draws) {
      out << d.iter << ',' << format_double(d.a) << ',' << format_double(d.sigma2)
          << ',' << format_double(d.mu) << ',' << format_double(d.b) << ','
          << format_double(d.theta);
      if (trend) out << ',' << format_double(d.c);
      out << ',' << format_double(d.logpost) << '\n';
    }
    detail::finish_write(out, path);
  }

  {
    const std::string path = dir + "/x_draws.csv";
    auto out = detail::open_out(path);
    out << "iter";
    if (!chain.x_draws.empty())
      for (std::size_t i = 0; i < chain.x_draws.front().values.size(); ++i)
        out << ",x_" << (i + 1);
    out << '\n';
    for (const LatentDraw& d : chain.x_draws) {
      out << d.iter;
      for (double v : d.values) out << ',' << format_double(v);
      out << '\n';
    }
    detail::finish_write(out, path);
  }

  {
    const std::string path = dir + "/meta.json";
    nlohmann::json j;
    j["accept_rates"] = {{"x", chain.accept_rates.x},
                         {"cox", chain.accept_rates.cox},
                         {"hawkes", chain.accept_rates.hawkes}};
    j["config"] = detail::config_json(chain.config);
    j["dt"] = chain.dt;
    auto out = detail::open_out(path);
    out << j.dump(2) << '\n';
    detail::finish_write(out, path);
  }
}

// Read back a chain directory written by write_chain. The log-posterior
// trace is restored for the recorded (post-burn-in) sweeps only.
inline ChainSamples read_chain(const std::string& dir) {
  ChainSamples chain;
  {
    const std::string path = dir + "/meta.json";
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    nlohmann::json j;
    try {
      in >> j;
      chain.config = detail::config_from_json(j.at("config"));
      chain.accept_rates.x = j.at("accept_rates").at("x").get<double>();
      chain.accept_rates.cox = j.at("accept_rates").at("cox").get<double>();
      chain.accept_rates.hawkes = j.at("accept_rates").at("hawkes").get<double>();
      chain.dt = j.at("dt").get<double>();
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path + ": " + e.what());
    }
  }

  {
    const std::string path = dir + "/chain.csv";
    const auto lines = detail::read_lines(path);
    if (lines.empty()) throw DataError(path + ": empty file");
    const auto header = detail::split_csv(lines[0]);
    const bool trend = header.size() == 8;
    const std::size_t expect = trend ? 8 : 7;
    if (header.size() != expect || header[0] != "iter")
      throw DataError(path + ":1: unrecognized chain header");
    for (std::size_t i = 1; i < lines.size(); ++i) {
      if (lines[i].empty() && i + 1 == lines.size()) break;
      const auto f = detail::split_csv(lines[i]);
      if (f.size() != expect)
        throw DataError(path + ":" + std::to_string(i + 1) + ": expected " +
                        std::to_string(expect) + " columns");
      ParamDraw d;
      d.iter = static_cast<std::size_t>(detail::parse_int(f[0], path, i + 1));
      d.a = detail::parse_double(f[1], path, i + 1);
      d.sigma2 = detail::parse_double(f[2], path, i + 1);
      d.mu = detail::parse_double(f[3], path, i + 1);
      d.b = detail::parse_double(f[4], path, i + 1);
      d.theta = detail::parse_double(f[5], path, i + 1);
      d.c = trend ? detail::parse_double(f[6], path, i + 1) : 0.0;
      d.logpost = detail::parse_double(f[expect - 1], path, i + 1);
      chain.param_draws.push_back(d);
      chain.log_post_trace.push_back(d.logpost);
    }
  }

  {
    const std::string path = dir + "/x_draws.csv";
    const auto lines = detail::read_lines(path);
    if (lines.empty()) throw DataError(path + ": empty file");
    for (std::size_t i = 1; i < lines.size(); ++i) {
      if (lines[i].empty() && i + 1 == lines.size()) break;
      const auto f = detail::split_csv(lines[i]);
      if (f.size() < 2)
        throw DataError(path + ":" + std::to_string(i + 1) + ": missing values");
      LatentDraw d;
      d.iter = static_cast<std::size_t>(detail::parse_int(f[0], path, i + 1));
      d.values.reserve(f.size() - 1);
      for (std::size_t k = 1; k < f.size(); ++k)
        d.values.push_back(detail::parse_double(f[k], path, i + 1));
      chain.x_draws.push_back(std::move(d));
    }
  }
  return chain;
}

namespace detail {

inline nlohmann::json stats_json(const ParamStats& s) {
  return {{"mean", s.mean}, {"sd", s.sd}, {"ess", s.ess}};
}

inline nlohmann::json band_json(const Band& band) {
  return {{"mean", band.mean}, {"lo", band.lo}, {"hi", band.hi}};
}

}  // namespace detail

// Fit summary as a single JSON document (schema documented in the README).
// Pass a ResidualReport to embed the goodness-of-fit scalars.
inline void write_summary(const FitSummary& summary, const std::string& path,
                          const ResidualReport* residual_report = nullptr) {
  nlohmann::json j;
  nlohmann::json params;
  params["a"] = detail::stats_json(summary.a);
  params["sigma2"] = detail::stats_json(summary.sigma2);
  params["mu"] = detail::stats_json(summary.mu);
  params["b"] = detail::stats_json(summary.b);
  params["theta"] = detail::stats_json(summary.theta);
  if (summary.trend) params["c"] = detail::stats_json(summary.c);
  j["params"] = params;
  j["trend"] = summary.trend;
  j["hawkes_pct"] = detail::stats_json(summary.hawkes_pct);
  j["timescales"] = {{"cox", summary.timescale_cox},
                     {"hawkes", summary.timescale_hawkes},
                     {"cox_mean_of_draws", summary.timescale_cox_draw_mean},
                     {"hawkes_mean_of_draws", summary.timescale_hawkes_draw_mean}};
  j["accept_rates"] = {{"x", summary.accept_rates.x},
                       {"cox", summary.accept_rates.cox},
                       {"hawkes", summary.accept_rates.hawkes}};
  j["bands"] = {{"lambda", detail::band_json(summary.lambda_band)},
                {"background", detail::band_json(summary.background_band)},
                {"hawkes", detail::band_json(summary.hawkes_band)}};
  j["dt"] = summary.dt;
  j["config"] = detail::config_json(summary.config);
  j["seed"] = summary.config.seed;
  if (residual_report) {
    j["residuals"] = {{"n_events", residual_report->tau.size()},
                      {"ks_stat", residual_report->ks_stat},
                      {"ks_band", residual_report->ks_band},
                      {"within_band", residual_report->within_band}};
  }
  auto out = detail::open_out(path);
  out << j.dump(2) << '\n';
  detail::finish_write(out, path);
}

// Plot-ready per-bin intensity bands.
inline void write_bands(const FitSummary& summary, const CountSeries& y,
                        const std::string& path) {
  if (summary.lambda_band.mean.size() != y.counts.size())
    throw std::invalid_argument("write_bands: summary and counts lengths differ");
  auto out = detail::open_out(path);
  out << "i,y,lambda_mean,lambda_lo,lambda_hi,background_mean,hawkes_mean\n";
  for (std::size_t i = 0; i < y.counts.size(); ++i) {
    out << (i + 1) << ',' << y.counts[i] << ','
        << format_double(summary.lambda_band.mean[i]) << ','
        << format_double(summary.lambda_band.lo[i]) << ','
        << format_double(summary.lambda_band.hi[i]) << ','
        << format_double(summary.background_band.mean[i]) << ','
        << format_double(summary.hawkes_band.mean[i]) << '\n';
  }
  detail::finish_write(out, path);
}

inline void write_residuals(const ResidualReport& rep, const std::string& path) {
  auto out = detail::open_out(path);
  out << "k,tau,excess\n";
  for (std::size_t k = 0; k < rep.tau.size(); ++k)
    out << (k + 1) << ',' << format_double(rep.tau[k]) << ','
        << format_double(rep.excess[k]) << '\n';
  detail::finish_write(out, path);
}

inline void write_interevent(const InterEventHist& hist, const std::string& path) {
  auto out = detail::open_out(path);
  out << "lag_lo,observed,baseline\n";
  for (std::size_t k = 0; k < hist.lag_lo.size(); ++k)
    out << format_double(hist.lag_lo[k]) << ',' << format_double(hist.observed[k])
        << ',' << format_double(hist.baseline[k]) << '\n';
  detail::finish_write(out, path);
}

inline void write_latent(const LatentPath& x, const std::string& path) {
  auto out = detail::open_out(path);
  out << "index,x\n";
  for (std::size_t i = 0; i < x.values.size(); ++i)
    out << (i + 1) << ',' << format_double(x.values[i]) << '\n';
  detail::finish_write(out, path);
}

inline void write_decomp(const CountSeries& y, const IntensityDecomposition& d,
                         const std::string& path) {
  auto out = detail::open_out(path);
  out << "index,count,lambda,background,hawkes\n";
  for (std::size_t i = 0; i < y.counts.size(); ++i)
    out << (i + 1) << ',' << y.counts[i] << ',' << format_double(d.lambda[i]) << ','
        << format_double(d.background[i]) << ',' << format_double(d.hawkes[i]) << '\n';
  detail::finish_write(out, path);
}

}  // namespace hawkescox

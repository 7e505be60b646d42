#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace mgrt {

/// Time-of-use tariff. Buy-price bands partition the 1440-minute day:
/// off-peak 19:00-07:00, mid-peak 07:00-12:00 and 17:00-19:00,
/// on-peak 12:00-17:00. Selling is a single flat band. Prices in cents/kWh.
struct TouSchedule {
  double off_peak = 6.5;
  double mid_peak = 9.4;
  double on_peak = 13.4;
  double sell = 5.0;

  void validate() const;
};

/// Band prices for a clock minute in [0, 1440).
std::pair<double, double> tou_price_at(const TouSchedule& tou, int minute_of_day);

/// Minute-resolution exogenous data for one engagement: aggregate household
/// load, solar generation and the buy/sell tariff expanded per minute.
struct Scenario {
  std::vector<double> load_kw;
  std::vector<double> solar_kw;
  std::vector<double> buy_price;
  std::vector<double> sell_price;

  std::size_t minutes() const { return load_kw.size(); }
  std::size_t hours() const { return minutes() / 60; }

  /// Enforces the data contract: equal lengths, a whole number of hours,
  /// finite values, non-negative powers, positive prices.
  void validate() const;
};

/// Controller input over a T-step horizon: per-hour averages of load, solar
/// and prices plus the reported battery state of charge.
struct StateWindow {
  std::vector<double> load_kw;
  std::vector<double> solar_kw;
  std::vector<double> buy_price;
  std::vector<double> sell_price;
  double soc = 0.0;

  std::size_t steps() const { return load_kw.size(); }
};

/// Mean of one scenario hour of a minute series.
double hour_average(std::span<const double> series, std::size_t hour);

/// Horizon window starting at `hour_index`. Entry i covers scenario hour
/// (hour_index + i) mod hours: the horizon wraps periodically past the data
/// end. Forecasts are exact by construction.
StateWindow hourly_window(const Scenario& scenario, std::size_t hour_index,
                          std::size_t horizon, double soc);

/// Reads `minute,load_kw` / `minute,solar_kw` CSVs and expands the tariff
/// per minute. Errors carry the offending file and row.
Scenario load_scenario(const std::filesystem::path& load_path,
                       const std::filesystem::path& solar_path,
                       const TouSchedule& tou);

/// Writes load.csv and solar.csv under `dir` at full double precision, so a
/// save/load round trip reproduces the series exactly.
void save_scenario(const Scenario& scenario, const std::filesystem::path& dir);

/// Shape knobs for the synthetic generator. The contract is fixed (diurnal
/// load with an evening peak, daytime solar bell); only amplitudes move.
struct SynthParams {
  double base_load_kw = 0.6;
  double morning_peak_kw = 1.2;   // centered 07:30
  double evening_peak_kw = 2.2;   // centered 18:20
  double afternoon_load_kw = 2.6; // shoulder centered 15:45
  double solar_peak_kw = 3.2;
  int dawn_minute = 330;
  int dusk_minute = 1170;
  double noise_kw = 0.15;
};

/// Deterministic synthetic scenario with a guaranteed peak-shaving
/// opportunity: daytime surplus to store or sell, evening/afternoon deficit
/// to shave. Uses the default tariff for the price series.
Scenario synth_scenario(std::uint64_t seed, int days,
                        const SynthParams& params = {},
                        const TouSchedule& tou = {});

}  // namespace mgrt

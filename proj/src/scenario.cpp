#include "mgrt/scenario.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "mgrt/rng.hpp"

namespace mgrt {
namespace {

constexpr int kMinutesPerDay = 1440;

bool parse_double(std::string_view text, double& out) {
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last;
}

bool parse_size(std::string_view text, std::size_t& out) {
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last;
}

std::string fmt_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// Reads a two-column minute CSV with the given header. Minute indices must
/// run 0,1,2,... with one row per minute.
std::vector<double> read_minute_csv(const std::filesystem::path& path,
                                    const std::string& expected_header) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string());
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("parse error in " + path.string() + ": empty file");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != expected_header) {
    throw std::runtime_error("parse error in " + path.string() +
                             ": expected header '" + expected_header + "', got '" +
                             line + "'");
  }
  std::vector<double> values;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    const std::string where =
        "parse error in " + path.string() + " row " + std::to_string(row + 1);
    if (comma == std::string::npos) {
      throw std::runtime_error(where + ": expected 'minute,value'");
    }
    std::size_t minute = 0;
    double value = 0.0;
    if (!parse_size(std::string_view(line).substr(0, comma), minute)) {
      throw std::runtime_error(where + ": bad minute index");
    }
    if (minute != row) {
      throw std::runtime_error(where + ": minute " + std::to_string(minute) +
                               " out of order (expected " + std::to_string(row) + ")");
    }
    if (!parse_double(std::string_view(line).substr(comma + 1), value)) {
      throw std::runtime_error(where + ": bad value");
    }
    if (!std::isfinite(value)) {
      throw std::runtime_error(where + ": non-finite value");
    }
    if (value < 0.0) {
      throw std::runtime_error(where + ": negative value");
    }
    values.push_back(value);
    ++row;
  }
  if (values.empty()) {
    throw std::runtime_error("parse error in " + path.string() + ": no data rows");
  }
  return values;
}

void write_minute_csv(const std::filesystem::path& path, const std::string& header,
                      std::span<const double> values) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  out << header << "\n";
  for (std::size_t m = 0; m < values.size(); ++m) {
    out << m << "," << fmt_full(values[m]) << "\n";
  }
  if (!out) {
    throw std::runtime_error("write failed for " + path.string());
  }
}

/// Unnormalized bump: 1 at the center, falling off over `width_min` minutes.
double bump(double minute_of_day, double center_min, double width_min) {
  const double x = (minute_of_day - center_min) / width_min;
  return std::exp(-0.5 * x * x);
}

}  // namespace

void TouSchedule::validate() const {
  if (!(off_peak > 0.0) || !(mid_peak > 0.0) || !(on_peak > 0.0) || !(sell > 0.0)) {
    throw std::invalid_argument("tariff prices must be positive");
  }
}

std::pair<double, double> tou_price_at(const TouSchedule& tou, int minute_of_day) {
  if (minute_of_day < 0 || minute_of_day >= kMinutesPerDay) {
    throw std::out_of_range("minute_of_day " + std::to_string(minute_of_day) +
                            " outside [0, 1440)");
  }
  double buy;
  if (minute_of_day < 7 * 60) {
    buy = tou.off_peak;
  } else if (minute_of_day < 12 * 60) {
    buy = tou.mid_peak;
  } else if (minute_of_day < 17 * 60) {
    buy = tou.on_peak;
  } else if (minute_of_day < 19 * 60) {
    buy = tou.mid_peak;
  } else {
    buy = tou.off_peak;
  }
  return {buy, tou.sell};
}

void Scenario::validate() const {
  const std::size_t n = load_kw.size();
  if (n == 0 || n % 60 != 0) {
    throw std::invalid_argument("scenario length must be a positive multiple of 60 minutes");
  }
  if (solar_kw.size() != n || buy_price.size() != n || sell_price.size() != n) {
    throw std::invalid_argument("scenario series lengths differ");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(load_kw[i]) || !std::isfinite(solar_kw[i]) ||
        !std::isfinite(buy_price[i]) || !std::isfinite(sell_price[i])) {
      throw std::invalid_argument("non-finite scenario value at minute " + std::to_string(i));
    }
    if (load_kw[i] < 0.0 || solar_kw[i] < 0.0) {
      throw std::invalid_argument("negative power at minute " + std::to_string(i));
    }
    if (buy_price[i] <= 0.0 || sell_price[i] <= 0.0) {
      throw std::invalid_argument("non-positive price at minute " + std::to_string(i));
    }
  }
}

double hour_average(std::span<const double> series, std::size_t hour) {
  double sum = 0.0;
  const std::size_t start = hour * 60;
  for (std::size_t m = start; m < start + 60; ++m) {
    sum += series[m];
  }
  return sum / 60.0;
}

StateWindow hourly_window(const Scenario& scenario, std::size_t hour_index,
                          std::size_t horizon, double soc) {
  const std::size_t hours = scenario.hours();
  if (hour_index >= hours) {
    throw std::out_of_range("hour_index " + std::to_string(hour_index) +
                            " outside scenario (" + std::to_string(hours) + " hours)");
  }
  if (horizon < 1) {
    throw std::invalid_argument("horizon must be at least 1");
  }
  StateWindow w;
  w.load_kw.reserve(horizon);
  w.solar_kw.reserve(horizon);
  w.buy_price.reserve(horizon);
  w.sell_price.reserve(horizon);
  for (std::size_t i = 0; i < horizon; ++i) {
    const std::size_t h = (hour_index + i) % hours;
    w.load_kw.push_back(hour_average(scenario.load_kw, h));
    w.solar_kw.push_back(hour_average(scenario.solar_kw, h));
    w.buy_price.push_back(hour_average(scenario.buy_price, h));
    w.sell_price.push_back(hour_average(scenario.sell_price, h));
  }
  w.soc = soc;
  return w;
}

Scenario load_scenario(const std::filesystem::path& load_path,
                       const std::filesystem::path& solar_path,
                       const TouSchedule& tou) {
  tou.validate();
  Scenario sc;
  sc.load_kw = read_minute_csv(load_path, "minute,load_kw");
  sc.solar_kw = read_minute_csv(solar_path, "minute,solar_kw");
  if (sc.load_kw.size() != sc.solar_kw.size()) {
    throw std::runtime_error(
        "length mismatch: " + load_path.string() + " has " +
        std::to_string(sc.load_kw.size()) + " rows, " + solar_path.string() +
        " has " + std::to_string(sc.solar_kw.size()));
  }
  const std::size_t n = sc.load_kw.size();
  sc.buy_price.reserve(n);
  sc.sell_price.reserve(n);
  for (std::size_t m = 0; m < n; ++m) {
    const auto [buy, sell] = tou_price_at(tou, static_cast<int>(m % kMinutesPerDay));
    sc.buy_price.push_back(buy);
    sc.sell_price.push_back(sell);
  }
  sc.validate();
  return sc;
}

void save_scenario(const Scenario& scenario, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_minute_csv(dir / "load.csv", "minute,load_kw", scenario.load_kw);
  write_minute_csv(dir / "solar.csv", "minute,solar_kw", scenario.solar_kw);
}

Scenario synth_scenario(std::uint64_t seed, int days, const SynthParams& p,
                        const TouSchedule& tou) {
  if (days < 1) {
    throw std::invalid_argument("days must be at least 1");
  }
  tou.validate();
  const std::size_t n = static_cast<std::size_t>(days) * kMinutesPerDay;
  Scenario sc;
  sc.load_kw.reserve(n);
  sc.solar_kw.reserve(n);
  sc.buy_price.reserve(n);
  sc.sell_price.reserve(n);

  Rng load_rng = Rng::stream(seed, "synth/load");
  Rng solar_rng = Rng::stream(seed, "synth/solar");

  // Smooth per-day randomness: a handful of sinusoids with random phase, so
  // neighbouring minutes stay correlated and hourly averages stay tame.
  struct Wobble {
    double amp[3];
    double freq[3];
    double phase[3];
    double at(double t_min) const {
      double v = 0.0;
      for (int i = 0; i < 3; ++i) {
        v += amp[i] * std::sin(freq[i] * t_min + phase[i]);
      }
      return v;
    }
  };
  auto make_wobble = [](Rng& rng, double amp) {
    Wobble w{};
    for (int i = 0; i < 3; ++i) {
      w.amp[i] = amp * rng.uniform(0.4, 1.0);
      w.freq[i] = rng.uniform(0.002, 0.02);  // periods of roughly 5h down to 30min
      w.phase[i] = rng.uniform(0.0, 6.283185307179586);
    }
    return w;
  };
  const Wobble load_wobble = make_wobble(load_rng, p.noise_kw);
  const Wobble solar_wobble = make_wobble(solar_rng, p.noise_kw);

  for (int day = 0; day < days; ++day) {
    // Day-to-day spread: overall consumption and cloud factors.
    const double load_scale = 1.0 + 0.08 * load_rng.uniform(-1.0, 1.0);
    const double cloud = solar_rng.uniform(0.85, 1.0);
    for (int m = 0; m < kMinutesPerDay; ++m) {
      const double t = static_cast<double>(m);
      const std::size_t minute = static_cast<std::size_t>(day) * kMinutesPerDay + m;

      double load = p.base_load_kw;
      load += p.morning_peak_kw * bump(t, 7.5 * 60, 55.0);
      load += p.afternoon_load_kw * bump(t, 15.75 * 60, 60.0);
      load += p.evening_peak_kw * bump(t, 18.33 * 60, 55.0);
      load = load * load_scale + load_wobble.at(static_cast<double>(minute));
      load = std::max(load, 0.05);

      double solar = 0.0;
      if (m > p.dawn_minute && m < p.dusk_minute) {
        const double x = static_cast<double>(m - p.dawn_minute) /
                         static_cast<double>(p.dusk_minute - p.dawn_minute);
        const double envelope = std::sin(3.141592653589793 * x);
        solar = p.solar_peak_kw * cloud * envelope * envelope;
        solar += solar_wobble.at(static_cast<double>(minute)) * envelope;
        solar = std::max(solar, 0.0);
      }

      const auto [buy, sell] = tou_price_at(tou, m);
      sc.load_kw.push_back(load);
      sc.solar_kw.push_back(solar);
      sc.buy_price.push_back(buy);
      sc.sell_price.push_back(sell);
    }
  }
  sc.validate();
  return sc;
}

}  // namespace mgrt

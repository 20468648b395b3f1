// ghs: command-line front end for Gaussian-Hermite sampling and the
// shift-consistency harness.
//
// Exit codes: 0 success, 2 I/O failure, 3 invalid configuration,
// 4 dimension error.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "ghs/ghs.hpp"

namespace fs = std::filesystem;

namespace {

enum ExitCode : int { kOk = 0, kIoError = 2, kConfigError = 3, kDimensionError = 4 };

int exit_code_for(ghs::ErrorKind kind) {
  using ghs::ErrorKind;
  switch (kind) {
    case ErrorKind::io: return kIoError;
    case ErrorKind::dimension_mismatch:
    case ErrorKind::odd_size_input:
    case ErrorKind::non_square_input:
    case ErrorKind::shape_mismatch:
    case ErrorKind::size_not_divisible:
    case ErrorKind::grid_too_small: return kDimensionError;
    default: return kConfigError;
  }
}

struct GlobalOptions {
  std::uint64_t seed = 0;
  double tolerance = ghs::kDefaultTolerance;
  bool quiet = false;
};

struct SamplerOptions {
  std::string input;
  std::string method = "ghs";
  std::optional<std::size_t> size;
  std::string sigma = "auto";
  bool truncate_orders = false;
  int pivot_window = 1;
};

std::optional<double> parse_sigma(const std::string& text) {
  if (text == "auto") return std::nullopt;
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ghs::Error(ghs::ErrorKind::invalid_config, "--sigma must be 'auto' or a number");
  }
}

ghs::Shift parse_shift(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos)
    throw ghs::Error(ghs::ErrorKind::invalid_config, "shift '" + text + "' is not 'c,r'");
  try {
    std::size_t a = 0, b = 0;
    const std::string cs = text.substr(0, comma), rs = text.substr(comma + 1);
    const long long c = std::stoll(cs, &a);
    const long long r = std::stoll(rs, &b);
    if (a != cs.size() || b != rs.size()) throw std::invalid_argument(text);
    return {c, r};
  } catch (const std::exception&) {
    throw ghs::Error(ghs::ErrorKind::invalid_config, "shift '" + text + "' is not 'c,r'");
  }
}

std::vector<ghs::Shift> parse_shift_list(const std::string& text, std::size_t size) {
  if (text == "all") return ghs::all_shifts(size);
  std::vector<ghs::Shift> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find(';', start);
    const std::string item = text.substr(start, end == std::string::npos ? std::string::npos : end - start);
    if (!item.empty()) out.push_back(parse_shift(item));
    if (end == std::string::npos) break;
    start = end + 1;
  }
  if (out.empty()) throw ghs::Error(ghs::ErrorKind::invalid_config, "empty shift list");
  return out;
}

ghs::DownsampleConfig make_config(const SamplerOptions& o, std::size_t input_size) {
  ghs::DownsampleConfig c;
  c.method = ghs::parse_method(o.method);
  c.output_size = o.size.value_or(input_size / 2);
  c.sigma = parse_sigma(o.sigma);
  c.order_truncation = o.truncate_orders;
  c.pivot_window = o.pivot_window;
  ghs::validate(c, input_size);
  return c;
}

std::string input_id(const std::string& path) { return fs::path(path).filename().string(); }

std::string hash_hex(std::uint64_t h) { return fmt::format("{:016x}", h); }

void add_sampler_options(CLI::App* cmd, SamplerOptions& o, bool with_method) {
  cmd->add_option("input", o.input, "Input PGM image")->required();
  if (with_method)
    cmd->add_option("--method", o.method, "ghs | maxpool | lpf | aps")->capture_default_str();
  cmd->add_option("--size", o.size, "Output size N (default M/2)");
  cmd->add_option("--sigma", o.sigma, "Gaussian scale: auto or a positive value")->capture_default_str();
  cmd->add_flag("--truncate-orders", o.truncate_orders, "GHS: keep only the first N orders");
  cmd->add_option("--pivot-window", o.pivot_window, "GHS pivot window: 1, 3 or 5")->capture_default_str();
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) fmt::print(stderr, "warning: {}\n", w);
}

int run_downsample(const GlobalOptions& g, const SamplerOptions& o, const std::string& out) {
  const auto img = ghs::read_pgm(o.input);
  const auto config = make_config(o, img.decoded.size());
  const auto result = ghs::downsample(img.decoded, config);
  ghs::write_pgm(out, result.output.channel(0), img.bit_depth);
  if (result.pivot && !g.quiet)
    fmt::print(stderr, "pivot: cols={} rows={} unique={}\n", result.pivot->location.cols,
               result.pivot->location.rows, result.pivot->unique);
  print_warnings(result.warnings);
  return kOk;
}

int run_sweep(const GlobalOptions& g, const SamplerOptions& o, const std::string& shifts,
              const std::string& report_path, const std::string& format) {
  if (format != "json" && format != "csv")
    throw ghs::Error(ghs::ErrorKind::invalid_config, "--format must be json or csv");
  const auto img = ghs::read_pgm(o.input);
  const auto config = make_config(o, img.decoded.size());
  const auto list = parse_shift_list(shifts, img.decoded.size());
  const auto report = ghs::shift_sweep(img.decoded, config, list, input_id(o.input), g.tolerance);
  if (!report_path.empty()) {
    if (format == "csv") {
      ghs::write_file(report_path, ghs::report_to_csv(report));
    } else {
      auto j = ghs::report_to_json(report);
      j["input_hash"] = hash_hex(img.pixel_hash());
      j["output_size"] = config.output_size;
      ghs::write_file(report_path, ghs::canonical_json(j));
    }
  }
  print_warnings(report.warnings);
  if (!g.quiet)
    fmt::print("method={} ad_sum_max={} invariant_fraction={:.3f}\n", ghs::to_string(report.method),
               ghs::format_real(report.ad_sum_max), report.invariant_fraction);
  return kOk;
}

int run_compare(const GlobalOptions& g, const SamplerOptions& o, const std::string& report_path,
                std::string images_dir, const std::string& panel_shift) {
  const auto img = ghs::read_pgm(o.input);
  const std::size_t m = img.decoded.size();
  const ghs::Shift shift = parse_shift(panel_shift);
  if (images_dir.empty()) images_dir = fs::path(report_path).parent_path().string();
  if (images_dir.empty()) images_dir = ".";
  std::error_code ec;
  fs::create_directories(images_dir, ec);
  if (ec) throw ghs::Error(ghs::ErrorKind::io, "cannot create '" + images_dir + "'");

  const auto shifted = ghs::wrap_shift(img.decoded, shift);
  const fs::path dir(images_dir);
  ghs::write_pgm(dir / "original.pgm", img.decoded.channel(0), img.bit_depth);
  ghs::write_pgm(dir / "shifted.pgm", shifted.channel(0), img.bit_depth);

  nlohmann::json reports = nlohmann::json::array();
  nlohmann::json consistency = nlohmann::json::object();
  std::vector<double> ad_max;
  for (ghs::Method method : ghs::kAllMethods) {
    SamplerOptions mo = o;
    mo.method = std::string(ghs::to_string(method));
    const auto config = make_config(mo, m);
    const ghs::Downsampler sampler(m, config);
    const auto name = std::string(ghs::to_string(method));
    ghs::write_pgm(dir / (name + ".pgm"), sampler(img.decoded).output.channel(0), img.bit_depth);
    ghs::write_pgm(dir / (name + "_shifted.pgm"), sampler(shifted).output.channel(0), img.bit_depth);
    const auto report = ghs::shift_sweep_all(img.decoded, config, input_id(o.input), g.tolerance);
    print_warnings(report.warnings);
    reports.push_back(ghs::report_to_json(report));
    ad_max.push_back(report.ad_sum_max);
    consistency[name] = ghs::feature_stack_consistency(img.decoded, config, g.seed);
    if (!g.quiet)
      fmt::print("method={} ad_sum_max={} invariant_fraction={:.3f} feature_stack_consistency={:.4f}\n",
                 name, ghs::format_real(report.ad_sum_max), report.invariant_fraction,
                 consistency[name].get<double>());
  }
  // kAllMethods order: ghs, maxpool, lpf, aps.
  const bool ordered = ad_max[0] <= ad_max[3] && ad_max[3] <= ad_max[2] && ad_max[2] <= ad_max[1];

  nlohmann::json j;
  j["input_id"] = input_id(o.input);
  j["input_hash"] = hash_hex(img.pixel_hash());
  j["input_size"] = m;
  j["output_size"] = o.size.value_or(m / 2);
  j["panel_shift"] = {shift.cols, shift.rows};
  j["seed"] = g.seed;
  j["reports"] = reports;
  j["feature_stack_consistency"] = consistency;
  j["ordering_ghs_aps_lpf_maxpool"] = ordered;
  ghs::write_file(report_path, ghs::canonical_json(j));
  if (!g.quiet) fmt::print("ordering ghs<=aps<=lpf<=maxpool: {}\n", ordered ? "yes" : "no");
  return kOk;
}

int run_moments(const GlobalOptions& g, const std::string& input, std::optional<std::size_t> orders,
                const std::string& sigma_text, const std::string& pivot_text, const std::string& out,
                const std::string& format) {
  if (format != "csv" && format != "bin")
    throw ghs::Error(ghs::ErrorKind::invalid_config, "--format must be csv or bin");
  const auto img = ghs::read_pgm(input);
  const std::size_t m = img.decoded.size();
  const std::size_t p = orders.value_or(m);
  if (p < 1) throw ghs::Error(ghs::ErrorKind::invalid_config, "--orders must be positive");
  const double sigma = parse_sigma(sigma_text).value_or(ghs::sigma_default(static_cast<long long>(p) - 1));
  const auto basis = ghs::build_basis(p, ghs::make_sampling_grid(m), sigma);

  std::vector<ghs::MomentMatrix> moments;
  if (pivot_text == "max") {
    auto mc = ghs::ghm_max_centered(img.decoded, basis);
    if (!g.quiet)
      fmt::print(stderr, "pivot: cols={} rows={} unique={}\n", mc.pivot.location.cols,
                 mc.pivot.location.rows, mc.pivot.unique);
    if (!mc.pivot.unique) print_warnings({"non-unique pivot; moments are not shift invariant"});
    moments = std::move(mc.channels);
  } else if (pivot_text == "none") {
    for (const auto& c : img.decoded.data()) moments.push_back(ghs::ghm(c, basis));
  } else {
    const ghs::Shift pivot = parse_shift(pivot_text);
    for (const auto& c : img.decoded.data()) moments.push_back(ghs::ghm_pivot(c, basis, pivot));
  }

  for (std::size_t s = 0; s < moments.size(); ++s) {
    fs::path path(out);
    if (moments.size() > 1)
      path.replace_filename(fmt::format("{}_c{}{}", path.stem().string(), s, path.extension().string()));
    ghs::write_file(path, format == "csv" ? ghs::moments_to_csv(moments[s]) : ghs::moments_to_binary(moments[s]));
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian-Hermite sampling: wrap-shift invariant downsampling and consistency checks"};
  app.require_subcommand(1);
  GlobalOptions g;
  app.add_option("--seed", g.seed, "Seed for the feature-stack experiment")->capture_default_str();
  app.add_option("--tolerance", g.tolerance, "Sum-AD threshold for an invariant shift")->capture_default_str();
  app.add_flag("--quiet", g.quiet, "Suppress informational output");

  SamplerOptions down_opts;
  std::string down_out;
  auto* down = app.add_subcommand("downsample", "Downsample an image with one method");
  down->fallthrough();
  add_sampler_options(down, down_opts, true);
  down->add_option("--out", down_out, "Output PGM path")->required();

  SamplerOptions sweep_opts;
  std::string sweep_shifts = "all", sweep_report, sweep_format = "json";
  auto* sweep = app.add_subcommand("sweep", "Shift-consistency sweep for one method");
  sweep->fallthrough();
  add_sampler_options(sweep, sweep_opts, true);
  sweep->add_option("--shifts", sweep_shifts, "all or \"c,r;c,r;...\"")->capture_default_str();
  sweep->add_option("--report", sweep_report, "Report output path");
  sweep->add_option("--format", sweep_format, "json or csv")->capture_default_str();

  SamplerOptions cmp_opts;
  std::string cmp_report, cmp_images, cmp_shift = "1,1";
  auto* compare = app.add_subcommand("compare", "Sweep all four methods and write comparison panels");
  compare->fallthrough();
  add_sampler_options(compare, cmp_opts, false);
  compare->add_option("--report", cmp_report, "Combined JSON report path")->required();
  compare->add_option("--images-dir", cmp_images, "Directory for panel images (default: report dir)");
  compare->add_option("--shift", cmp_shift, "Shift used for the shifted panels, \"c,r\"")->capture_default_str();

  std::string mom_input, mom_sigma = "auto", mom_pivot = "max", mom_out, mom_format = "csv";
  std::optional<std::size_t> mom_orders;
  auto* mom = app.add_subcommand("moments", "Dump Gaussian-Hermite moment matrices");
  mom->fallthrough();
  mom->add_option("input", mom_input, "Input PGM image")->required();
  mom->add_option("--orders", mom_orders, "Number of orders P (default M)");
  mom->add_option("--sigma", mom_sigma, "auto or a positive value")->capture_default_str();
  mom->add_option("--pivot", mom_pivot, "max, none or \"c,r\"")->capture_default_str();
  mom->add_option("--out", mom_out, "Output path")->required();
  mom->add_option("--format", mom_format, "csv or bin")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    if (*down) return run_downsample(g, down_opts, down_out);
    if (*sweep) return run_sweep(g, sweep_opts, sweep_shifts, sweep_report, sweep_format);
    if (*compare) return run_compare(g, cmp_opts, cmp_report, cmp_images, cmp_shift);
    if (*mom) return run_moments(g, mom_input, mom_orders, mom_sigma, mom_pivot, mom_out, mom_format);
  } catch (const ghs::Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kIoError;
  }
  return kConfigError;
}

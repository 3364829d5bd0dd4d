// speckle: command-line front end for the speckle statistics toolkit.
//
//   speckle simulate   --model fixed|negbin --n N --scatterers S [--alpha A] [--seed X] [--out file]
//   speckle distances  --input file [--roi x0,y0,w,h]
//   speckle fit        --input file --family <tag>|all
//   speckle batch      --manifest file.csv [--jobs J]
//   speckle roi-sweep  --input image --roi x0,y0,w,h [--fractions f1,f2,...]
//   speckle correlate  --input pairs.csv [--compare-r R --compare-n N]
//
// Exit codes: 0 success, 1 usage, 2 data error, 3 partial batch failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "speckle/speckle.hpp"

namespace {

using nlohmann::ordered_json;
using speckle::ingest::format_double;

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kPartial = 3 };

struct GlobalOptions {
  std::uint64_t seed = 0;
  std::string format = "json";
  std::string out;
  std::size_t jobs = 1;
};

struct InputOptions {
  std::string input;
  std::string input_kind = "auto";
  std::string input_format;
  std::string roi;
  double dynamic_range = speckle::ingest::kDefaultDynamicRange;
};

struct GridOptions {
  std::size_t grid_n = speckle::estimators::kDefaultAmplitudePoints;
  std::size_t freq_n = speckle::estimators::kDefaultFrequencyPoints;
  double freq_max = speckle::estimators::kDefaultFrequencyMax;
  double cutoff = speckle::estimators::kDefaultCutoff;
  double bandwidth = 0.0;

  speckle::distances::DistanceSettings settings() const {
    speckle::distances::DistanceSettings s;
    s.grid_points = grid_n;
    s.freq_points = freq_n;
    s.freq_max = freq_max;
    s.kde.boundary_cutoff = cutoff;
    if (bandwidth > 0.0) s.kde.bandwidth = bandwidth;
    s.validate();
    return s;
  }
};

void add_input_options(CLI::App* cmd, InputOptions& in, bool require_input = true) {
  auto* opt = cmd->add_option("--input,-i", in.input, "Amplitude CSV (header 'amplitude') or grayscale image");
  if (require_input) opt->required();
  cmd->add_option("--input-kind", in.input_kind, "auto, amplitudes or image")
      ->check(CLI::IsMember({"auto", "amplitudes", "image"}))
      ->capture_default_str();
  cmd->add_option("--input-format", in.input_format, "grayscale-png-8, grayscale-png-16, pgm or csv-matrix");
  cmd->add_option("--roi", in.roi, "Region of interest x0,y0,width,height (required for images)");
  cmd->add_option("--dynamic-range", in.dynamic_range, "Decades spanned by the display log mapping")
      ->capture_default_str();
}

void add_grid_options(CLI::App* cmd, GridOptions& g) {
  cmd->add_option("--grid-n", g.grid_n, "Amplitude grid points")->capture_default_str();
  cmd->add_option("--freq-n", g.freq_n, "Frequency grid points")->capture_default_str();
  cmd->add_option("--freq-max", g.freq_max, "Largest frequency of the eCF grid")->capture_default_str();
  cmd->add_option("--cutoff", g.cutoff, "KDE boundary cutoff")->capture_default_str();
  cmd->add_option("--bandwidth", g.bandwidth, "Fixed KDE bandwidth (0 = automatic)")->capture_default_str();
}

speckle::pipeline::InputSpec input_spec(const InputOptions& in) {
  speckle::pipeline::InputSpec spec;
  spec.path = in.input;
  if (in.input_kind == "amplitudes") spec.kind = speckle::pipeline::InputKind::amplitudes;
  if (in.input_kind == "image") spec.kind = speckle::pipeline::InputKind::image;
  if (!in.input_format.empty()) spec.format = speckle::ingest::parse_image_format(in.input_format);
  if (!in.roi.empty()) spec.roi = speckle::ingest::parse_roi(in.roi);
  spec.dynamic_range = in.dynamic_range;
  return spec;
}

ordered_json settings_json(const speckle::distances::GridMeta& m) {
  return ordered_json{{"grid_points", m.grid_points}, {"grid_min", m.grid_min}, {"grid_max", m.grid_max},
                      {"freq_points", m.freq_points}, {"freq_max", m.freq_max}, {"bandwidth", m.bandwidth},
                      {"cutoff", m.cutoff}};
}

ordered_json report_json(const speckle::distances::DistanceReport& r) {
  return ordered_json{{"d_ks", r.d_ks},   {"d_mse", r.d_mse}, {"d_mmd", r.d_mmd},
                      {"d_cr", r.d_cr},   {"n", r.n},         {"settings", settings_json(r.grid_meta)}};
}

std::string report_csv_cells(const speckle::distances::DistanceReport& r) {
  return format_double(r.d_ks) + "," + format_double(r.d_mse) + "," + format_double(r.d_mmd) + "," +
         format_double(r.d_cr) + "," + std::to_string(r.n);
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw speckle::DataError("cannot write output file: " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

 private:
  std::ofstream file_;
};

// Resolved option values of one (sub)command: given values or defaults.
void echo_options(const CLI::App& cmd, ordered_json& into) {
  for (const CLI::Option* opt : cmd.get_options()) {
    if (opt->get_lnames().empty()) continue;
    const std::string& name = opt->get_lnames().front();
    if (name == "help" || name == "version" || name == "config") continue;
    const auto& given = opt->results();
    if (given.empty()) {
      into[name] = opt->get_default_str();
    } else if (given.size() == 1) {
      into[name] = given.front();
    } else {
      into[name] = given;
    }
  }
}

ordered_json config_echo(const CLI::App& app) {
  ordered_json config = ordered_json::object();
  echo_options(app, config);
  for (const CLI::App* sub : app.get_subcommands()) {
    ordered_json options = ordered_json::object();
    echo_options(*sub, options);
    config[sub->get_name()] = options;
  }
  return config;
}

void emit_json(const GlobalOptions& g, ordered_json body, const CLI::App& app, const std::string& command) {
  body["command"] = command;
  body["version"] = speckle::kVersion;
  body["config"] = config_echo(app);
  Output out(g.out);
  out.stream() << body.dump(2) << '\n';
}

// --- simulate ---------------------------------------------------------------

struct SimulateOptions {
  std::string model = "fixed";
  std::size_t n = 0;
  double scatterers = 0.0;
  double alpha = 0.0;
  std::size_t width = 0;
  std::size_t height = 0;
  double dynamic_range = speckle::ingest::kDefaultDynamicRange;
  int bit_depth = 16;
};

int run_simulate(const SimulateOptions& o, const GlobalOptions& g, const CLI::App& cmd) {
  speckle::sim::SimConfig config;
  config.seed = g.seed;
  const bool image = o.width > 0 || o.height > 0;
  if (image && (o.width == 0 || o.height == 0)) throw speckle::InvalidArgument("--width and --height go together");
  if (!image && o.n == 0) throw speckle::InvalidArgument("--n is required (or --width/--height for an image)");
  config.n_samples = image ? o.width * o.height : o.n;
  if (o.model == "fixed") {
    if (cmd.count("--alpha") > 0) throw speckle::InvalidArgument("--alpha is only valid with --model negbin");
    if (o.scatterers < 1.0 || o.scatterers != std::floor(o.scatterers)) {
      throw speckle::InvalidArgument("--scatterers must be a positive integer for the fixed model");
    }
    config.scatterers = speckle::sim::FixedScatterers{static_cast<std::uint64_t>(o.scatterers)};
  } else {
    if (cmd.count("--alpha") == 0) throw speckle::InvalidArgument("--model negbin requires --alpha");
    config.scatterers = speckle::sim::NegBinomialScatterers{o.scatterers, o.alpha};
  }
  const auto sample = speckle::sim::sample_phasor_sum(config);

  if (image) {
    if (g.out.empty()) throw speckle::InvalidArgument("image output requires --out <file.pgm|file.png>");
    speckle::ingest::PixelMatrix amplitudes{o.height, o.width,
                                            std::vector<double>(sample.values().begin(), sample.values().end()), 0.0};
    const double depth = o.bit_depth == 16 ? 65535.0 : 255.0;
    const auto pixels = speckle::ingest::log_compress(amplitudes, o.dynamic_range, depth);
    const std::string ext = std::filesystem::path(g.out).extension().string();
    if (ext == ".png") {
      speckle::ingest::save_png(g.out, pixels, o.bit_depth);
    } else {
      speckle::ingest::save_pgm(g.out, pixels);
    }
    return kOk;
  }
  Output out(g.out);
  speckle::ingest::write_amplitude_csv(out.stream(), sample);
  return kOk;
}

// --- distances --------------------------------------------------------------

int run_distances(const InputOptions& in, const GridOptions& grid, const GlobalOptions& g, const CLI::App& app) {
  const auto report = speckle::pipeline::analyze(speckle::pipeline::load_sample(input_spec(in)), grid.settings());
  if (g.format == "csv") {
    Output out(g.out);
    out.stream() << "d_ks,d_mse,d_mmd,d_cr,n\n" << report_csv_cells(report) << '\n';
  } else {
    emit_json(g, report_json(report), app, "distances");
  }
  return kOk;
}

// --- fit --------------------------------------------------------------------

ordered_json fit_json(const speckle::distfit::FitResult& f) {
  ordered_json params = ordered_json::object();
  const auto names = speckle::distfit::param_names(f.family);
  for (std::size_t i = 0; i < names.size() && i < f.params.size(); ++i) params[std::string(names[i])] = f.params[i];
  ordered_json j{{"family", speckle::distfit::family_tag(f.family)},
                 {"params", params},
                 {"log_likelihood", f.log_likelihood},
                 {"gof", f.gof ? ordered_json(*f.gof) : ordered_json(nullptr)},
                 {"converged", f.converged},
                 {"iterations", f.iterations},
                 {"dropped_zeros", f.dropped_zeros}};
  return j;
}

int run_fit(const InputOptions& in, const GridOptions& grid, const std::string& family, const GlobalOptions& g,
            const CLI::App& app) {
  std::vector<speckle::distfit::Family> families;
  if (family == "all") {
    families.assign(speckle::distfit::kAllFamilies.begin(), speckle::distfit::kAllFamilies.end());
  } else {
    families.push_back(speckle::distfit::parse_family(family));
  }
  const auto settings = grid.settings();
  const auto sample = speckle::ingest::normalize_rms(speckle::pipeline::load_sample(input_spec(in)));
  const auto results =
      speckle::distfit::rank_families(sample, families, settings.amplitude_grid(sample), settings.kde);

  if (g.format == "csv") {
    Output out(g.out);
    out.stream() << "family,params,log_likelihood,gof,converged,iterations\n";
    for (const auto& f : results) {
      std::string params;
      const auto names = speckle::distfit::param_names(f.family);
      for (std::size_t i = 0; i < names.size() && i < f.params.size(); ++i) {
        if (!params.empty()) params += ';';
        params += std::string(names[i]) + "=" + format_double(f.params[i]);
      }
      out.stream() << speckle::distfit::family_tag(f.family) << ',' << params << ','
                   << format_double(f.log_likelihood) << ',' << (f.gof ? format_double(*f.gof) : "") << ','
                   << (f.converged ? "true" : "false") << ',' << f.iterations << '\n';
    }
  } else {
    ordered_json list = ordered_json::array();
    for (const auto& f : results) list.push_back(fit_json(f));
    emit_json(g, ordered_json{{"n", sample.size()}, {"results", list}}, app, "fit");
  }
  return kOk;
}

// --- batch ------------------------------------------------------------------

int run_batch(const std::string& manifest, const InputOptions& in, const GridOptions& grid, const GlobalOptions& g,
              const CLI::App& app) {
  speckle::pipeline::BatchOptions options;
  const auto spec = input_spec(in);
  options.kind = spec.kind;
  options.format = spec.format;
  options.dynamic_range = spec.dynamic_range;
  options.settings = grid.settings();
  options.jobs = g.jobs;
  const auto rows = speckle::pipeline::run_batch(speckle::pipeline::read_manifest(manifest), options);

  std::size_t failures = 0;
  for (const auto& r : rows) failures += r.report ? 0 : 1;

  if (g.format == "csv") {
    Output out(g.out);
    out.stream() << "label,path,roi,d_ks,d_mse,d_mmd,d_cr,n,error\n";
    for (const auto& r : rows) {
      out.stream() << csv_quote(r.entry.label) << ',' << csv_quote(r.entry.path) << ','
                   << csv_quote(r.entry.roi ? speckle::ingest::format_roi(*r.entry.roi) : "") << ','
                   << (r.report ? report_csv_cells(*r.report) : ",,,,") << ',' << csv_quote(r.error) << '\n';
    }
  } else {
    ordered_json list = ordered_json::array();
    for (const auto& r : rows) {
      ordered_json j{{"label", r.entry.label},
                     {"path", r.entry.path},
                     {"roi", r.entry.roi ? speckle::ingest::format_roi(*r.entry.roi) : ""}};
      if (r.report) {
        j["report"] = report_json(*r.report);
      } else {
        j["error"] = r.error;
      }
      list.push_back(j);
    }
    emit_json(g, ordered_json{{"rows", list}, {"failures", failures}}, app, "batch");
  }
  if (failures > 0) {
    std::cerr << "speckle batch: " << failures << " of " << rows.size() << " entries failed\n";
    return kPartial;
  }
  return kOk;
}

// --- roi-sweep --------------------------------------------------------------

int run_roi_sweep(const InputOptions& in, const GridOptions& grid, const std::vector<double>& fractions,
                  const GlobalOptions& g, const CLI::App& app) {
  auto spec = input_spec(in);
  if (speckle::pipeline::resolve_kind(spec) != speckle::pipeline::InputKind::image) {
    throw speckle::InvalidArgument("roi-sweep needs an image input");
  }
  if (!spec.roi) throw speckle::InvalidArgument("roi-sweep requires a base --roi x0,y0,w,h");
  const auto amplitudes = speckle::pipeline::load_linear_image(spec);
  const auto& fr = fractions.empty() ? speckle::pipeline::default_sweep_fractions() : fractions;
  const auto rows = speckle::pipeline::roi_sweep(amplitudes, *spec.roi, fr, grid.settings());

  if (g.format == "csv") {
    Output out(g.out);
    out.stream() << "fraction,x0,y0,width,height,d_ks,d_mse,d_mmd,d_cr,n,warning\n";
    for (const auto& r : rows) {
      out.stream() << format_double(r.fraction) << ',' << r.roi.x0 << ',' << r.roi.y0 << ',' << r.roi.width << ','
                   << r.roi.height << ',' << (r.report ? report_csv_cells(*r.report) : ",,,,") << ','
                   << csv_quote(r.warning) << '\n';
    }
  } else {
    ordered_json list = ordered_json::array();
    for (const auto& r : rows) {
      ordered_json j{{"fraction", r.fraction}, {"roi", speckle::ingest::format_roi(r.roi)}};
      if (r.report) {
        j["report"] = report_json(*r.report);
      } else {
        j["warning"] = r.warning;
      }
      list.push_back(j);
    }
    emit_json(g, ordered_json{{"rows", list}}, app, "roi-sweep");
  }
  return kOk;
}

// --- correlate --------------------------------------------------------------

speckle::stats::PairedSeries read_pairs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw speckle::DataError("cannot read file: " + path);
  std::vector<double> x, y;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (speckle::ingest::detail::trim(line).empty()) continue;
    const auto cells = speckle::ingest::detail::split(line, ',');
    std::optional<double> a, b;
    if (cells.size() == 2) {
      a = speckle::ingest::detail::parse_double(cells[0]);
      b = speckle::ingest::detail::parse_double(cells[1]);
    }
    if (!a || !b) {
      if (x.empty() && line_no == 1) continue;  // header
      throw speckle::DataError("expected two numeric columns at line " + std::to_string(line_no) + " of " + path);
    }
    x.push_back(*a);
    y.push_back(*b);
  }
  try {
    return speckle::stats::PairedSeries(std::move(x), std::move(y));
  } catch (const speckle::InvalidArgument& e) {
    throw speckle::DataError(std::string(e.what()) + ": " + path);
  }
}

int run_correlate(const std::string& path, double compare_r, std::size_t compare_n, bool compare,
                  const GlobalOptions& g, const CLI::App& app) {
  const auto series = read_pairs(path);
  speckle::stats::Regression reg{};
  try {
    reg = speckle::stats::linear_regression(series);
  } catch (const speckle::InvalidArgument& e) {
    throw speckle::DataError(e.what());
  }
  const double rho = speckle::stats::spearman_rho(series);
  std::optional<speckle::stats::FisherResult> fisher;
  if (compare) fisher = speckle::stats::fisher_compare(reg.r, series.size(), compare_r, compare_n);

  if (g.format == "csv") {
    Output out(g.out);
    out.stream() << "n,r,slope,intercept,spearman,fisher_z,p_fisher_vs\n"
                 << series.size() << ',' << format_double(reg.r) << ',' << format_double(reg.slope) << ','
                 << format_double(reg.intercept) << ',' << format_double(rho) << ','
                 << (fisher ? format_double(fisher->z) : "") << ',' << (fisher ? format_double(fisher->p_two_sided) : "")
                 << '\n';
  } else {
    ordered_json j{{"n", series.size()},
                   {"r", reg.r},
                   {"slope", reg.slope},
                   {"intercept", reg.intercept},
                   {"spearman", rho}};
    if (fisher) {
      j["fisher_z"] = fisher->z;
      j["p_fisher_vs"] = fisher->p_two_sided;
    }
    emit_json(g, j, app, "correlate");
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Speckle amplitude statistics: model-free distances to the Rayleigh benchmark and parametric fits"};
  app.set_version_flag("--version", std::string(speckle::kVersion));
  app.set_config("--config", "", "Read key=value options from a file (command-line flags take precedence)");
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions global;
  app.add_option("--seed", global.seed, "Random seed")->capture_default_str();
  app.add_option("--format", global.format, "Output format")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  app.add_option("--out,-o", global.out, "Output file (default: stdout)");
  app.add_option("--jobs,-j", global.jobs, "Concurrent batch items")->check(CLI::PositiveNumber)->capture_default_str();

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Generate phasor-sum speckle amplitudes");
  simulate->add_option("--model", sim.model, "Scatterer-count model")
      ->check(CLI::IsMember({"fixed", "negbin"}))
      ->capture_default_str();
  simulate->add_option("--n", sim.n, "Number of amplitudes");
  simulate->add_option("--scatterers", sim.scatterers, "Phasor count (fixed) or mean count (negbin)")->required();
  simulate->add_option("--alpha", sim.alpha, "Negative-binomial shape (negbin only)");
  simulate->add_option("--width", sim.width, "Write a WxH log-compressed image instead of a CSV");
  simulate->add_option("--height", sim.height, "Image height");
  simulate->add_option("--dynamic-range", sim.dynamic_range, "Decades of the image log mapping")->capture_default_str();
  simulate->add_option("--bit-depth", sim.bit_depth, "Image bit depth")
      ->check(CLI::IsMember({8, 16}))
      ->capture_default_str();

  InputOptions dist_in;
  GridOptions dist_grid;
  auto* distances = app.add_subcommand("distances", "Four distances to the benchmark Rayleigh distribution");
  add_input_options(distances, dist_in);
  add_grid_options(distances, dist_grid);

  InputOptions fit_in;
  GridOptions fit_grid;
  std::string family = "all";
  auto* fit = app.add_subcommand("fit", "Maximum-likelihood distribution fits ranked by goodness of fit");
  add_input_options(fit, fit_in);
  add_grid_options(fit, fit_grid);
  fit->add_option("--family", family, "Family tag or 'all' (" + speckle::distfit::valid_family_tags() + ")")
      ->capture_default_str();

  InputOptions batch_in;
  GridOptions batch_grid;
  std::string manifest;
  auto* batch = app.add_subcommand("batch", "Distances for every entry of a path,roi,label manifest");
  batch->add_option("--manifest", manifest, "Manifest CSV")->required();
  add_input_options(batch, batch_in, false);
  add_grid_options(batch, batch_grid);

  InputOptions sweep_in;
  GridOptions sweep_grid;
  std::vector<double> fractions;
  auto* sweep = app.add_subcommand("roi-sweep", "Distances over nested centered sub-ROIs");
  add_input_options(sweep, sweep_in);
  add_grid_options(sweep, sweep_grid);
  sweep->add_option("--fractions", fractions, "Area fractions of the base ROI")->delimiter(',');

  std::string pairs;
  double compare_r = 0.0;
  std::size_t compare_n = 0;
  auto* correlate = app.add_subcommand("correlate", "Pearson/Spearman correlation and regression of a two-column CSV");
  correlate->add_option("--input,-i", pairs, "Two-column CSV (x,y)")->required();
  auto* cr_opt = correlate->add_option("--compare-r", compare_r, "Correlation to compare against (Fisher z)");
  correlate->add_option("--compare-n", compare_n, "Sample size of the compared correlation")->needs(cr_opt);
  cr_opt->needs("--compare-n");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*simulate) return run_simulate(sim, global, *simulate);
    if (*distances) return run_distances(dist_in, dist_grid, global, app);
    if (*fit) return run_fit(fit_in, fit_grid, family, global, app);
    if (*batch) return run_batch(manifest, batch_in, batch_grid, global, app);
    if (*sweep) return run_roi_sweep(sweep_in, sweep_grid, fractions, global, app);
    if (*correlate) return run_correlate(pairs, compare_r, compare_n, correlate->count("--compare-r") > 0, global, app);
  } catch (const speckle::InvalidArgument& e) {
    std::cerr << "speckle: usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const speckle::DataError& e) {
    std::cerr << "speckle: data error: " << e.what() << '\n';
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "speckle: error: " << e.what() << '\n';
    return kData;
  }
  return kUsage;
}

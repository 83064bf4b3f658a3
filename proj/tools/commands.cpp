#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "json.hpp"
#include "nahm/errors.hpp"
#include "nahm/transform.hpp"

namespace nahm::cli {

using nlohmann::json;

const std::vector<std::string> kSubcommands = {"spectrum", "grid", "index", "scan", "singularity", "audit"};

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Summary {
  std::string command;
  json checks = json::array();
  bool all = true;
  void check(const std::string& name, bool pass, json value = nullptr) {
    checks.push_back({{"name", name}, {"pass", pass}, {"value", value}});
    all = all && pass;
  }
};

std::filesystem::path out_path(const RunConfig& cfg, const std::string& name) {
  return std::filesystem::path(cfg.out_dir) / name;
}

void write_text(const std::filesystem::path& p, const std::string& s) {
  std::ofstream os(p);
  if (!os) throw InvalidArgument("cannot write " + p.string());
  os << s;
}

// rows of equal-keyed objects as CSV or a JSON array
void write_table(const RunConfig& cfg, const std::string& stem, const json& rows) {
  if (cfg.format == "json") {
    write_text(out_path(cfg, stem + ".json"), rows.dump(2) + "\n");
    return;
  }
  std::string s;
  if (!rows.empty()) {
    bool first = true;
    for (auto it = rows[0].begin(); it != rows[0].end(); ++it) {
      s += (first ? "" : ",") + it.key();
      first = false;
    }
    s += "\n";
    for (const auto& r : rows) {
      first = true;
      for (auto it = r.begin(); it != r.end(); ++it) {
        std::string cell = it->is_string() ? it->get<std::string>() : it->dump();
        if (it->is_array()) cell = "\"" + cell + "\"";
        s += (first ? "" : ",") + cell;
        first = false;
      }
      s += "\n";
    }
  }
  write_text(out_path(cfg, stem + ".csv"), s);
}

json vec_json(const Vec3& v) { return {v[0], v[1], v[2]}; }

Vec3 end_point(const RawConfig& r, const std::string& key, const ConnectionPath& A) {
  std::string s = r.str(key, "plus");
  if (s == "plus") return A.limit_w(End::plus);
  if (s == "minus") return A.limit_w(End::minus);
  return r.vec3(key);
}

std::vector<Vec3> default_rays() {
  return {Vec3(1, 0, 0), Vec3(-1, 0, 0), Vec3(0, 1, 0), Vec3(0, -1, 0), Vec3(0, 0, 1), Vec3(0, 0, -1)};
}

std::vector<TorusPoint> singular_points(const ConnectionPath& A) {
  return singular_set(A.flat_limit(End::plus), A.flat_limit(End::minus));
}

void run_spectrum(const RunConfig& cfg, Summary& sum) {
  const auto& r = cfg.raw;
  Vec3 w = r.has("spectrum.w") ? r.vec3("spectrum.w") : cfg.model.path->limit_w(End::plus);
  Vec3 z = r.vec3("spectrum.z", Vec3::Zero());
  double cutoff = r.num("spectrum.cutoff", 8.0);
  SpectrumMultiset s = exact_spectrum(TorusPoint(w), TorusPoint(z), cutoff);
  json rows = json::array();
  for (const auto& e : s.entries) rows.push_back({{"value", e.value}, {"multiplicity", e.multiplicity}});
  write_table(cfg, "spectrum", rows);
  bool symmetric = true;
  for (const auto& e : s.entries) symmetric = symmetric && s.multiplicity_of(-e.value, 1e-12) == e.multiplicity;
  sum.check("spectrum_symmetric", symmetric);
  double d = std::min(torus_distance(TorusPoint(z), TorusPoint(w)), torus_distance(TorusPoint(z), TorusPoint(-w)));
  if (kTwoPi * d <= cutoff && d > 1e-12) {
    double sp = s.smallest_positive();
    sum.check("smallest_positive_is_2pi_dist", std::abs(sp - kTwoPi * d) <= 1e-9, sp);
  }
}

void run_grid(const RunConfig& cfg, Summary& sum) {
  const auto& r = cfg.raw;
  const auto& A = *cfg.model.path;
  std::string kind = r.str("grid.kind", "z");
  const int n = static_cast<int>(r.integer("grid.n", 32));
  if (n < 1) throw InvalidArgument("grid.n must be positive");
  json rows = json::array();
  if (kind == "z") {
    Weight d{r.num("weight.minus", 0.0), r.num("weight.plus", 0.0)};
    auto W = singular_points(A);
    const double cell = std::sqrt(3.0) / n;
    bool consistent = true;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          Vec3 z = Vec3(i, j, k) / n;
          bool f = is_fredholm(A, z, d);
          double dist = distance_to_set(TorusPoint(z), W);
          rows.push_back({{"z", vec_json(z)}, {"fredholm", f}, {"dist_W", dist}});
          if (d == Weight{0, 0}) consistent = consistent && (f == (dist > 1e-10));
          else if (!f) consistent = consistent && dist < std::max(std::abs(d.minus), std::abs(d.plus)) / kTwoPi + cell;
        }
    sum.check("nonfredholm_exactly_on_walls", consistent, json{{"weight", {d.minus, d.plus}}, {"cell", cell}});
  } else if (kind == "delta") {
    Vec3 z = r.vec3("grid.z", Vec3::Zero());
    double lo = r.num("grid.delta_min", -3.0), hi = r.num("grid.delta_max", 3.0);
    FredholmGrid g = fredholm_grid(A, z, std::max(std::abs(lo), std::abs(hi)) + 1);
    for (double v : g.spec_minus) rows.push_back({{"family", "minus"}, {"wall", v}});
    for (double v : g.spec_plus) rows.push_back({{"family", "plus"}, {"wall", v}});
    bool ok = true;
    int on_wall = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        Weight d{lo + (hi - lo) * (i + 0.5) / n, lo + (hi - lo) * (j + 0.5) / n};
        bool f = is_fredholm(A, z, d);
        ok = ok && f == !g.is_on_wall(d, 1e-10);
        on_wall += !f;
      }
    sum.check("wall_map_consistent", ok,
              json{{"delta_min", lo}, {"delta_max", hi}, {"n", n}, {"non_fredholm_samples", on_wall}});
  } else {
    throw InvalidArgument("grid.kind must be z or delta");
  }
  write_table(cfg, "grid", rows);
}

void run_index(const RunConfig& cfg, Summary& sum) {
  const auto& r = cfg.raw;
  const auto& A = *cfg.model.path;
  std::vector<Vec3> zs = r.has("index.z") ? r.vec3_list("index.z") : std::vector<Vec3>{Vec3(0.05, 0.45, 0.7)};
  json rows = json::array();
  for (const auto& z : zs) {
    KernelResult k = kernel(assemble_dirac(A, z, {0, 0}, cfg.disc, Which::DStar), 0);
    SpectralFlow sf = spectral_flow_events(A, z, cfg.disc);
    rows.push_back({{"z", vec_json(z)},
                    {"dim_ker", k.dim_ker},
                    {"dim_coker", k.dim_coker},
                    {"index", k.index},
                    {"spectral_flow", sf.flow},
                    {"events", static_cast<int>(sf.events.size())}});
    sum.check("index_equals_minus_flow", k.index == -sf.flow, rows.back());
  }
  write_table(cfg, "index", rows);
}

void run_scan(const RunConfig& cfg, Summary& sum) {
  const auto& r = cfg.raw;
  const auto& A = *cfg.model.path;
  ZBox box;
  box.origin = r.vec3("scan.origin", Vec3(0.6, 0.6, 0.6));
  auto counts = r.list("scan.counts", {3, 3, 3});
  if (counts.size() != 3) throw InvalidArgument("scan.counts needs three entries");
  for (int i = 0; i < 3; ++i) box.counts[i] = static_cast<int>(counts[i]);
  double h = r.num("scan.h", 0.01);
  TransformOptions opt;
  opt.h_z = r.num("scan.margin", 2 * h);
  MonopoleField M = assemble_monopole(A, box, h, cfg.disc, static_cast<int>(r.integer("scan.tree", 0)), opt,
                                      cfg.workers);
  write_monopole_jsonl(out_path(cfg, "monopole.jsonl").string(), M);
  bool rank_ok = true, anti = true;
  for (const auto& p : M.points) {
    rank_ok = rank_ok && p.rank == std::abs(p.index);
    if (p.rank) anti = anti && (p.higgs + p.higgs.adjoint()).norm() <= 1e-9 * std::max(1.0, p.higgs.norm());
  }
  sum.check("rank_equals_abs_index", rank_ok);
  sum.check("higgs_anti_hermitian", anti);
  BogomolnyResult b = bogomolny_residual(M);
  sum.check("bogomolny_residual_reported", true, b.rank_zero ? json("rank_zero") : json(b.residual));
}

void run_singularity(const RunConfig& cfg, Summary& sum) {
  const auto& r = cfg.raw;
  const auto& A = *cfg.model.path;
  Vec3 w = end_point(r, "singularity.w", A);
  auto radii = r.list("singularity.radii", {0.04, 0.02, 0.01});
  auto rays = r.has("singularity.rays") ? r.vec3_list("singularity.rays") : default_rays();
  std::optional<double> eps;
  if (r.has("singularity.eps")) eps = r.num("singularity.eps");
  SingularReport rep = higgs_singularity_scan(A, w, rays, radii, cfg.disc, eps);
  write_singular_report(out_path(cfg, "singularity.json").string(), rep);
  for (size_t i = 0; i < rep.rays.size(); ++i) {
    const auto& ray = rep.rays[i];
    sum.check("pole_coefficient_half_ray" + std::to_string(i), std::isfinite(ray.coefficient) && std::abs(2 * std::abs(ray.coefficient) - 1) <= 0.05,
              std::isfinite(ray.coefficient) ? json(ray.coefficient) : json(nullptr));
  }
  sum.check("isotropy_spread", std::isfinite(rep.isotropy_spread) && rep.isotropy_spread <= 0.02,
            std::isfinite(rep.isotropy_spread) ? json(rep.isotropy_spread) : json(nullptr));
}

void run_audit(const RunConfig& cfg, Summary& sum) {
  const auto& r = cfg.raw;
  const auto& A = *cfg.model.path;
  Vec3 w = end_point(r, "audit.w", A);
  auto W = singular_points(A);
  double eps = r.has("audit.eps") ? r.num("audit.eps") : safe_radius(TorusPoint(w), W, A.beta());
  Vec3 dir = r.vec3("audit.direction", Vec3(1, 2, 2)).normalized();
  auto radii = r.list("audit.radii", {0.2 * eps / kTwoPi, 0.4 * eps / kTwoPi, 0.6 * eps / kTwoPi});
  json rows = json::array();
  auto row = [&](double rad, const RankAudit& a) {
    return json{{"r", rad},           {"dim_vbar", a.dim_vbar},       {"dim_vcorner", a.dim_vcorner},
                {"dim_kbar", a.dim_kbar}, {"dim_h", a.dim_h},         {"dim_ehat", a.dim_ehat},
                {"dim_wprime", a.dim_wprime}, {"dim_dh", a.dim_dh},   {"rk_h_case", a.rk_h_case},
                {"residual_hatbar", a.residual_hatbar}, {"residual_hatv", a.residual_hatv},
                {"residual_split", a.residual_split},   {"residual_rk_h", a.residual_rk_h}};
  };
  for (double rad : radii) {
    RankAudit a = rank_audit(A, w + rad * dir, w, eps, cfg.disc);
    rows.push_back(row(rad, a));
    sum.check("audit_residuals_zero", a.passed(), rows.back());
  }
  RankAudit at = rank_audit(A, w, w, eps, cfg.disc);
  rows.push_back(row(0.0, at));
  sum.check("audit_residuals_zero", at.passed(), rows.back());
  sum.check("vcorner_equals_ehat_at_w", at.dim_vcorner == at.dim_ehat, rows.back());
  sum.check("rk_h_matches_case", at.dim_h == at.rk_h_case, rows.back());
  write_table(cfg, "audit", rows);
}
}  // namespace

int run_command(const std::string& sub, const RunConfig& cfg) {
  Summary sum;
  sum.command = sub;
  if (sub == "spectrum") run_spectrum(cfg, sum);
  else if (sub == "grid") run_grid(cfg, sum);
  else if (sub == "index") run_index(cfg, sum);
  else if (sub == "scan") run_scan(cfg, sum);
  else if (sub == "singularity") run_singularity(cfg, sum);
  else if (sub == "audit") run_audit(cfg, sum);
  else throw InvalidArgument("unknown subcommand " + sub);

  json s = {{"command", sub},
            {"model", cfg.model.name},
            {"format", cfg.format},
            {"seed", cfg.seed},
            {"checks", sum.checks},
            {"all_pass", sum.all}};
  write_text(out_path(cfg, "summary.json"), s.dump(2) + "\n");
  // the only non-deterministic output
  std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  write_text(out_path(cfg, "header.json"), json{{"timestamp", buf}, {"command", sub}}.dump(2) + "\n");
  return sum.all ? 0 : 1;
}

}  // namespace nahm::cli

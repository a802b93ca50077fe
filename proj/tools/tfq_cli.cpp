#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

#include "tfq/tfq.hpp"

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;
using namespace tfq;

namespace {

constexpr int schema_version = 1;
constexpr const char* tool_version = "1.0.0";

/// Keys that never enter the config hash or the resolved config.
const std::set<std::string> run_keys{"config", "out", "threads", "record-timings"};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string text(double v) { return format_number(v); }
std::string text(int v) { return std::to_string(v); }
std::string text(const std::string& v) { return v; }

struct Context {
    fs::path out;
    std::string hash;
    json artifacts = json::array();

    void write(const std::string& name, const std::string& content) {
        std::ofstream os(out / name, std::ios::binary);
        if (!os) throw ConfigError("out: cannot write " + (out / name).string());
        os << content;
        artifacts.push_back({{"file", name}, {"fnv1a64", hex64(fnv1a64(content))}});
    }
    void write_json(const std::string& name, json j) { write(name, j.dump(2) + "\n"); }
    template <typename T>
    void write_csv(const std::string& name, const T& v) {
        std::ostringstream os;
        tfq::write_csv(os, v, hash);
        write(name, os.str());
    }
    void write_dump(const std::string& name, const BinaryDump& d) {
        std::ostringstream os;
        write_binary(os, d);
        write(name, os.str());
    }
    json header(const std::string& command) const {
        return json{{"schema_version", schema_version}, {"command", command}, {"config_hash", hash}};
    }
};

struct Command {
    CLI::App* app = nullptr;
    std::vector<std::pair<std::string, std::function<std::string()>>> fields;
    std::function<int(Context&)> run;

    template <typename T>
    CLI::Option* field(const std::string& name, T& var, const std::string& desc) {
        fields.emplace_back(name, [&var] { return text(var); });
        return app->add_option("--" + name, var, desc)->capture_default_str();
    }
    std::set<std::string> keys() const {
        std::set<std::string> k(run_keys);
        for (const auto& f : fields) k.insert(f.first);
        return k;
    }
    std::vector<std::pair<std::string, std::string>> resolved() const {
        std::vector<std::pair<std::string, std::string>> r;
        for (const auto& [k, f] : fields) r.emplace_back(k, f());
        std::sort(r.begin(), r.end());
        return r;
    }
};

std::vector<double> parse_list(const std::string& field, const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, ',');) {
        try {
            std::size_t used = 0;
            double v = std::stod(item, &used);
            if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
            out.push_back(v);
        } catch (const std::exception&) {
            throw ConfigError(field + ": '" + item + "' is not a number");
        }
    }
    if (out.empty()) throw ConfigError(field + ": empty list");
    return out;
}

SymbolSpec symbol_field(const std::string& s) {
    try {
        return parse_symbol(s);
    } catch (const InvalidArgument& e) {
        const std::string msg = e.what();
        throw ConfigError(msg.rfind("symbol:", 0) == 0 ? msg : "symbol: " + msg);
    }
}

std::vector<std::string> signal_ids() {
    std::vector<std::string> ids;
    for (const auto& s : norm_signal_family(Grid(16, 1.0))) ids.push_back(s.id);
    return ids;
}

SampledSignal signal_by_id(const Grid& grid, const std::string& id) {
    for (auto& s : norm_signal_family(grid))
        if (s.id == id) return s.signal;
    throw ConfigError("signal: unknown signal '" + id + "'");
}

double rel_l2(const std::vector<cplx>& got, const std::vector<double>& ref) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < got.size(); ++i) {
        num += std::norm(got[i] - ref[i]);
        den += ref[i] * ref[i];
    }
    return std::sqrt(num / den);
}

std::vector<double> squared_modulus(const SampledSignal& f) {
    std::vector<double> out;
    for (auto v : f.values) out.push_back(std::norm(v));
    return out;
}

json lattice_json(const Lattice& L) { return {{"alpha", L.alpha}, {"beta", L.beta}, {"radius", L.radius}}; }

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

struct GridFields {
    int samples;
    double dt;
    double width = 1.0;
    Grid grid() const { return Grid(static_cast<std::size_t>(samples), dt); }
    SampledSignal window() const { return gaussian_window(grid(), width); }
};

void add_grid(Command& c, GridFields& g, bool with_width = true) {
    c.field("samples", g.samples, "grid size")->check(CLI::Range(8, 1 << 16));
    c.field("dt", g.dt, "sample spacing")->check(CLI::PositiveNumber);
    if (with_width) c.field("width", g.width, "Gaussian window width")->check(CLI::PositiveNumber);
}

struct LatticeFields {
    double alpha = 0.5;
    double beta = 0.5;
    int radius;
    Lattice lattice() const { return Lattice(alpha, beta, radius); }
};

void add_lattice(Command& c, LatticeFields& l) {
    c.field("alpha", l.alpha, "lattice time step")->check(CLI::PositiveNumber);
    c.field("beta", l.beta, "lattice frequency step")->check(CLI::PositiveNumber);
    c.field("radius", l.radius, "lattice index radius")->check(CLI::Range(0, 64));
}

void check_tau(double tau) {
    if (!(tau >= 0.0 && tau <= 1.0)) throw ConfigError("tau: must lie in [0, 1]");
}

// Selftest checks run on the closed-form cases of each module.
json selftest_checks(bool& ok) {
    json checks = json::array();
    auto add = [&](const std::string& name, double value, double tol) {
        bool pass = std::isfinite(value) && value <= tol;
        ok = ok && pass;
        checks.push_back({{"name", name}, {"value", finite_or_null(value)}, {"tolerance", tol}, {"pass", pass}});
    };
    const Grid G(256, 1.0 / 16.0);
    const auto g = gaussian_window(G, 1.0);

    add("fnv1a64 reference", hex64(fnv1a64("a")) == "af63dc4c8601ec8c" ? 0.0 : 1.0, 0.0);
    add("weight at origin", std::abs(weight_eval(WeightSpec::polynomial(3), {0, 0}) - 1.0), 1e-15);
    auto dist = [](PhaseSpacePoint a, PhaseSpacePoint b) { return std::hypot(a.x - b.x, a.omega - b.omega); };
    add("t_tau endpoints", std::max(dist(t_tau({1, 2}, {3, -1}, 0.0), {1, -1}), dist(t_tau({1, 2}, {3, -1}, 1.0), {3, 2})), 0.0);

    double stft_dev = 0.0;
    auto F = stft(g, g);
    for (Eigen::Index i = 0; i < F.rows(); ++i)
        for (Eigen::Index k = 0; k < F.cols(); ++k) {
            double x = F.x(i), w = F.omega(k);
            if (x * x + w * w > 9.0) continue;
            stft_dev = std::max(stft_dev, std::abs(std::abs(F.values(i, k)) - std::exp(-pi * (x * x + w * w) / 2.0)));
        }
    add("Gaussian STFT closed form", stft_dev, 1e-6);
    add("STFT inversion", reconstruct(g, g).rel_error, 1e-10);

    double wig_dev = 0.0;
    auto W = tau_wigner(g, g, 0.5);
    for (Eigen::Index i = 0; i < W.rows(); ++i)
        for (Eigen::Index k = 0; k < W.cols(); ++k) {
            double x = W.x(i), w = W.omega(k);
            if (x * x + w * w > 9.0) continue;
            wig_dev = std::max(wig_dev, std::abs(W.values(i, k) - 2.0 * std::exp(-2.0 * pi * (x * x + w * w))));
        }
    add("Gaussian Wigner closed form", wig_dev, 1e-6);
    add("Born-Jordan single node", (born_jordan_dist(g, g, Quadrature{{0.5}, {1.0}}).values - W.values).cwiseAbs().maxCoeff(), 0.0);
    double wsum = 0.0;
    for (double w : gauss_legendre(8).weights) wsum += w;
    add("Gauss-Legendre weight sum", std::abs(wsum - 1.0), 1e-14);

    add("constant symbol seminorm", std::abs(seminorm(constant(1.0), 4, 0.0, 4.0).value - 1.0), 1e-14);
    add("bracket symbol value", std::abs(eval_symbol(bracket_power(2.0), {1, 2}).real() - 6.0), 1e-12);

    const Lattice L(0.5, 0.5, 2);
    auto M = gabor_matrix_direct(constant(1.0), g, L, 0.5);
    double gram_dev = 0.0;
    for (std::size_t li = 0; li < L.count(); ++li)
        for (std::size_t mi = 0; mi < L.count(); ++mi)
            gram_dev = std::max(gram_dev, std::abs(M(li, mi) - inner_product(tf_shift(g, L.point(mi)), tf_shift(g, L.point(li)))));
    add("identity symbol Gram matrix", gram_dev, 1e-8);

    LatticeArray delta(Lattice(1.0, 1.0, 2));
    delta.at(0, 0) = 1.0;
    add("delta sequence norm", std::abs(weighted_seq_norm(delta, 1.0, 3.0) - 1.0), 1e-15);
    auto h = envelope(M, 0.0);
    add("identity envelope at 0", std::abs(std::abs(h.at(0, 0)) - 1.0), 1e-8);
    return checks;
}

std::string flag_arg(const std::string& key, const std::string& value) { return "--" + key + "=" + value; }

// Reads key = value lines; '#' starts a comment.
std::vector<std::string> config_args(const std::string& path, const Command& cmd) {
    std::ifstream is(path);
    if (!is) throw ConfigError("config: cannot read '" + path + "'");
    const auto known = cmd.keys();
    std::vector<std::string> out;
    int lineno = 0;
    for (std::string line; std::getline(is, line);) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        auto trim = [](std::string s) {
            auto b = s.find_first_not_of(" \t\r");
            auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: line " + std::to_string(lineno) + " is not of the form key = value");
        std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
        if (!known.count(key)) throw ConfigError(key + ": unknown config field");
        if (key == "config") throw ConfigError("config: nested config files are not supported");
        if (key == "record-timings") {
            if (value == "true" || value == "1") out.push_back("--record-timings");
            else if (value != "false" && value != "0") throw ConfigError("record-timings: expected true or false");
            continue;
        }
        out.push_back(flag_arg(key, value));
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Time-frequency quantization laboratory"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);
    app.set_version_flag("--version", tool_version);

    std::map<std::string, Command> commands;
    std::string config_path, out_dir = "tfq_out";
    int threads = 1;
    bool record_timings = false;

    auto make = [&](const std::string& name, const std::string& desc) -> Command& {
        Command& c = commands[name];
        c.app = app.add_subcommand(name, desc);
        c.app->add_option("--config", config_path, "key = value config file; flags override it");
        c.app->add_option("--out", out_dir, "output directory")->capture_default_str();
        c.app->add_option("--threads", threads, "worker threads; outputs do not depend on it")
            ->check(CLI::Range(1, 256))
            ->capture_default_str();
        c.app->add_flag("--record-timings", record_timings, "add wall-clock timings to the manifest");
        return c;
    };

    // stft
    GridFields stft_grid{256, 1.0 / 16.0};
    std::string stft_signal = "gauss_w1", stft_format = "both";
    int stft_step = 1, stft_pad = 1;
    {
        Command& c = make("stft", "STFT of a test signal, with reconstruction check");
        add_grid(c, stft_grid);
        c.field("signal", stft_signal, "test signal id")->check(CLI::IsMember(signal_ids()));
        c.field("x-step", stft_step, "time decimation in samples")->check(CLI::Range(1, 1 << 16));
        c.field("padding", stft_pad, "frequency zero-padding factor")->check(CLI::Range(1, 16));
        c.field("format", stft_format, "csv, binary or both")->check(CLI::IsMember({"csv", "binary", "both"}));
        c.run = [&](Context& ctx) {
            auto g = stft_grid.window();
            auto f = signal_by_id(stft_grid.grid(), stft_signal);
            auto F = stft(f, g, stft_step, stft_pad);
            double err = reconstruct(f, g).rel_error;
            if (stft_format != "binary") ctx.write_csv("stft.csv", F);
            if (stft_format != "csv") ctx.write_dump("stft.tfq", to_dump(F, fnv1a64(ctx.hash)));
            const bool ok = err <= 1e-10;
            auto j = ctx.header("stft");
            j["signal"] = stft_signal;
            j["rows"] = F.rows();
            j["cols"] = F.cols();
            j["reconstruction_rel_error"] = err;
            j["tolerance"] = 1e-10;
            j["contract_ok"] = ok;
            ctx.write_json("stft.json", j);
            return ok ? 0 : 3;
        };
    }

    // wigner
    GridFields wig_grid{256, 1.0 / 16.0};
    std::string wig_signal = "gauss_w1";
    double wig_tau = 0.5;
    int wig_nodes = 0;
    {
        Command& c = make("wigner", "tau-Wigner or Born-Jordan distribution with marginal checks");
        add_grid(c, wig_grid, false);
        c.field("signal", wig_signal, "test signal id")->check(CLI::IsMember(signal_ids()));
        c.field("tau", wig_tau, "quantization parameter in [0, 1]");
        c.field("nodes", wig_nodes, "Gauss-Legendre nodes for Born-Jordan; 0 selects tau-Wigner")->check(CLI::Range(0, 64));
        c.run = [&](Context& ctx) {
            check_tau(wig_tau);
            auto f = signal_by_id(wig_grid.grid(), wig_signal);
            auto W = wig_nodes > 0 ? born_jordan_dist(f, f, gauss_legendre(wig_nodes)) : tau_wigner(f, f, wig_tau);
            double et = rel_l2(time_marginal(W), squared_modulus(f));
            double ef = rel_l2(frequency_marginal(W), squared_modulus(fourier_transform(f)));
            ctx.write_csv("wigner.csv", W);
            const bool ok = et <= 1e-6 && ef <= 1e-6;
            auto j = ctx.header("wigner");
            j["signal"] = wig_signal;
            j["distribution"] = wig_nodes > 0 ? "born_jordan" : "tau_wigner";
            if (wig_nodes > 0) j["nodes"] = wig_nodes;
            else j["tau"] = wig_tau;
            j["time_marginal_rel_error"] = et;
            j["frequency_marginal_rel_error"] = ef;
            j["tolerance"] = 1e-6;
            j["contract_ok"] = ok;
            ctx.write_json("wigner.json", j);
            return ok ? 0 : 3;
        };
    }

    // frames
    GridFields fr_grid{2048, 1.0 / 20.0};
    LatticeFields fr_lat{0.5, 1.0, 128};
    {
        Command& c = make("frames", "Gabor frame bound estimates");
        add_grid(c, fr_grid);
        add_lattice(c, fr_lat);
        c.run = [&](Context& ctx) {
            auto r = frame_bounds(fr_grid.window(), fr_lat.lattice());
            auto j = ctx.header("frames");
            j["lattice"] = lattice_json(fr_lat.lattice());
            j["alpha_beta"] = fr_lat.alpha * fr_lat.beta;
            j["lower_bound"] = r.lower_bound_estimate;
            j["upper_bound"] = r.upper_bound_estimate;
            j["condition"] = finite_or_null(r.condition());
            j["gram_truncation_radius"] = r.gram_truncation_radius;
            ctx.write_json("frames.json", j);
            return 0;
        };
    }

    // matrix
    GridFields mx_grid{256, 1.0 / 16.0};
    LatticeFields mx_lat{0.5, 0.5, 4};
    std::string mx_symbol = "bracket_power(1)", mx_route = "direct";
    double mx_tau = 0.5, mx_tol = 1e-6;
    int mx_nodes = 8;
    {
        Command& c = make("matrix", "Gabor matrix of a quantized symbol");
        add_grid(c, mx_grid);
        add_lattice(c, mx_lat);
        c.field("symbol", mx_symbol, "symbol expression");
        c.field("tau", mx_tau, "quantization parameter in [0, 1]");
        c.field("route", mx_route, "direct, stft, both or bj")->check(CLI::IsMember({"direct", "stft", "both", "bj"}));
        c.field("nodes", mx_nodes, "Gauss-Legendre nodes for the bj route")->check(CLI::Range(1, 64));
        c.field("route-tol", mx_tol, "route agreement tolerance")->check(CLI::PositiveNumber);
        c.run = [&](Context& ctx) {
            check_tau(mx_tau);
            auto sym = symbol_field(mx_symbol);
            auto g = mx_grid.window();
            auto L = mx_lat.lattice();
            GaborMatrix M;
            double dev = 0.0;
            if (mx_route == "direct") M = gabor_matrix_direct(sym, g, L, mx_tau);
            else if (mx_route == "stft") M = gabor_matrix_stft(sym, g, L, mx_tau);
            else if (mx_route == "bj") M = born_jordan_matrix(sym, g, L, gauss_legendre(mx_nodes));
            else {
                M = gabor_matrix_direct(sym, g, L, mx_tau);
                dev = route_deviation(gabor_matrix_stft(sym, g, L, mx_tau), M);
            }
            ctx.write_csv("matrix.csv", M);
            ctx.write_dump("matrix.tfq", to_dump(M, fnv1a64(ctx.hash)));
            const bool ok = mx_route != "both" || dev <= mx_tol;
            auto j = ctx.header("matrix");
            j["symbol"] = to_string(sym);
            j["route"] = mx_route;
            if (M.born_jordan) j["nodes"] = mx_nodes;
            else j["tau"] = mx_tau;
            j["lattice"] = lattice_json(L);
            j["size"] = M.entries.rows();
            j["max_abs_entry"] = M.entries.cwiseAbs().maxCoeff();
            if (mx_route == "both") {
                j["route_deviation"] = dev;
                j["route_tolerance"] = mx_tol;
            }
            j["contract_ok"] = ok;
            ctx.write_json("matrix.json", j);
            return ok ? 0 : 3;
        };
    }

    // decay
    GridFields dc_grid{256, 1.0 / 16.0};
    LatticeFields dc_lat{0.5, 0.5, 6};
    std::string dc_symbol = "constant(1)";
    double dc_tau = 0.5, dc_m = 0.0, dc_q = 1.0, dc_s = 3.0;
    int dc_n = 4, dc_nodes = 0;
    {
        Command& c = make("decay", "envelope, decay order and bound constant of a Gabor matrix");
        add_grid(c, dc_grid);
        add_lattice(c, dc_lat);
        c.field("symbol", dc_symbol, "symbol expression");
        c.field("tau", dc_tau, "quantization parameter in [0, 1]");
        c.field("m", dc_m, "symbol order");
        c.field("n", dc_n, "off-diagonal decay order")->check(CLI::Range(0, 6));
        c.field("nodes", dc_nodes, "Born-Jordan check with this many nodes; 0 skips it")->check(CLI::Range(0, 64));
        c.field("q", dc_q, "Born-Jordan envelope norm exponent")->check(CLI::PositiveNumber);
        c.field("s", dc_s, "Born-Jordan envelope weight exponent");
        c.run = [&](Context& ctx) {
            check_tau(dc_tau);
            auto sym = symbol_field(dc_symbol);
            auto g = dc_grid.window();
            auto L = dc_lat.lattice();
            auto r = verify_th34(sym, g, L, dc_tau, dc_n, dc_m);
            ctx.write_csv("envelope.csv", r.envelope);
            auto j = ctx.header("decay");
            j["symbol"] = to_string(sym);
            j["tau"] = r.tau;
            j["m"] = r.m;
            j["n"] = r.n;
            j["lattice"] = lattice_json(L);
            json norms = json::array();
            for (const auto& e : r.envelope_norms) norms.push_back({{"q", finite_or_null(e.q)}, {"s", e.s}, {"value", e.value}});
            j["envelope_norms"] = norms;
            j["fitted_order"] = r.fitted_order;
            j["fitted_order_exceeds_n"] = r.fitted_order > r.n;
            j["seminorm_used"] = r.seminorm_used;
            j["bound_constant"] = r.bound_constant;
            json frac = {{"available", r.fractional_available}, {"s", r.fractional_s}};
            if (r.fractional_available) {
                frac["seminorm"] = r.fractional_seminorm;
                frac["bound_constant"] = r.fractional_bound_constant;
            }
            j["fractional"] = frac;
            bool ok = true;
            if (dc_nodes > 0) {
                auto b = bj_decay_check(sym, g, L, gauss_legendre(dc_nodes), dc_m, dc_q, dc_s);
                ctx.write_csv("bj_envelope.csv", b.bj_envelope);
                j["born_jordan"] = {{"nodes", dc_nodes},
                                    {"q", finite_or_null(dc_q)},
                                    {"s", dc_s},
                                    {"bj_norm", b.bj_norm},
                                    {"node_norms", b.node_norms},
                                    {"averaged_norm", b.averaged_norm},
                                    {"domination_ratio", b.domination_ratio},
                                    {"raw_domination_ratio", b.raw_domination_ratio},
                                    {"dominated", b.dominated}};
                ok = b.dominated;
            }
            j["contract_ok"] = ok;
            ctx.write_json("decay.json", j);
            return ok ? 0 : 3;
        };
    }

    // tausweep
    GridFields ts_grid{256, 1.0 / 16.0};
    LatticeFields ts_lat{0.5, 0.5, 4};
    std::string ts_symbol = "bracket_power(0.5)", ts_taus = "0,0.25,0.5,0.75,1";
    double ts_m = 0.5, ts_q = 1.0, ts_s = 3.0, ts_limit = 2.0;
    {
        Command& c = make("tausweep", "envelope norms across quantization parameters");
        add_grid(c, ts_grid);
        add_lattice(c, ts_lat);
        c.field("symbol", ts_symbol, "symbol expression");
        c.field("taus", ts_taus, "comma-separated tau values");
        c.field("m", ts_m, "symbol order");
        c.field("q", ts_q, "envelope norm exponent")->check(CLI::PositiveNumber);
        c.field("s", ts_s, "envelope weight exponent");
        c.field("ratio-limit", ts_limit, "max/min ratio treated as uniform")->check(CLI::PositiveNumber);
        c.run = [&](Context& ctx) {
            auto taus = parse_list("taus", ts_taus);
            for (double t : taus)
                if (!(t >= 0.0 && t <= 1.0)) throw ConfigError("taus: values must lie in [0, 1]");
            auto sym = symbol_field(ts_symbol);
            auto r = tau_sweep(sym, ts_grid.window(), ts_lat.lattice(), taus, ts_m, ts_q, ts_s);
            std::ostringstream csv;
            write_csv_preamble(csv, ctx.hash);
            csv << "tau,norm\n";
            for (std::size_t i = 0; i < r.taus.size(); ++i) csv << format_number(r.taus[i]) << ',' << format_number(r.norms[i]) << '\n';
            ctx.write("tausweep.csv", csv.str());
            const bool ok = r.ratio() <= ts_limit;
            auto j = ctx.header("tausweep");
            j["symbol"] = to_string(sym);
            j["lattice"] = lattice_json(ts_lat.lattice());
            j["m"] = ts_m;
            j["q"] = finite_or_null(ts_q);
            j["s"] = ts_s;
            j["taus"] = r.taus;
            j["norms"] = r.norms;
            j["max_over_tau"] = r.max_over_tau;
            j["min_over_tau"] = r.min_over_tau;
            j["ratio"] = r.ratio();
            j["ratio_limit"] = ts_limit;
            j["contract_ok"] = ok;
            ctx.write_json("tausweep.json", j);
            return ok ? 0 : 3;
        };
    }

    // norms
    GridFields nm_grid{512, 1.0 / 32.0};
    std::string nm_qs = "1,2,inf", nm_ss = "0,2";
    double nm_limit = 10.0;
    {
        Command& c = make("norms", "STFT and decomposition modulation norms on the test family");
        add_grid(c, nm_grid);
        c.field("qs", nm_qs, "comma-separated q exponents (inf allowed)");
        c.field("ss", nm_ss, "comma-separated weight exponents");
        c.field("bracket-limit", nm_limit, "admissible max/min ratio spread")->check(CLI::PositiveNumber);
        c.run = [&](Context& ctx) {
            auto qs = parse_list("qs", nm_qs), ss = parse_list("ss", nm_ss);
            for (double q : qs)
                if (!(q > 0.0)) throw ConfigError("qs: exponents must be positive");
            auto g = nm_grid.window();
            auto family = norm_signal_family(nm_grid.grid());
            std::ostringstream csv;
            write_csv_preamble(csv, ctx.hash);
            csv << "signal,q,s,stft_norm,decomp_norm,ratio\n";
            json brackets = json::array();
            bool ok = true;
            for (double q : qs)
                for (double s : ss) {
                    double lo = inf, hi = 0.0;
                    for (const auto& f : family) {
                        double a = modulation_norm_stft(f.signal, g, inf, q, WeightSpec::tensor(0, s));
                        double b = modulation_norm_decomp(f.signal, inf, q, WeightSpec::polynomial(0), WeightSpec::polynomial(s));
                        double r = b / a;
                        lo = std::min(lo, r);
                        hi = std::max(hi, r);
                        csv << f.id << ',' << format_number(q) << ',' << format_number(s) << ',' << format_number(a) << ','
                            << format_number(b) << ',' << format_number(r) << '\n';
                    }
                    double width = hi / lo;
                    ok = ok && width <= nm_limit;
                    brackets.push_back({{"q", finite_or_null(q)}, {"s", s}, {"min_ratio", lo}, {"max_ratio", hi}, {"bracket_width", width}});
                }
            ctx.write("norms.csv", csv.str());
            auto j = ctx.header("norms");
            j["brackets"] = brackets;
            j["bracket_limit"] = nm_limit;
            j["contract_ok"] = ok;
            ctx.write_json("norms.json", j);
            return ok ? 0 : 3;
        };
    }

    // embed
    GridFields em_grid{512, 1.0 / 32.0};
    {
        Command& c = make("embed", "embedding experiments with reversed controls");
        add_grid(c, em_grid, false);
        c.run = [&](Context& ctx) {
            auto suite = embedding_suite(em_grid.grid());
            json cases = json::array();
            bool ok = true;
            for (const auto& e : suite) {
                bool as_expected = e.report.violated == !e.predicted;
                ok = ok && as_expected;
                cases.push_back({{"name", e.name},
                                 {"family", e.family},
                                 {"predicted", e.predicted},
                                 {"violated", e.report.violated},
                                 {"growth", e.report.growth},
                                 {"max_ratio", e.report.max_ratio},
                                 {"as_expected", as_expected}});
            }
            auto j = ctx.header("embed");
            j["growth_limit"] = embedding_growth_limit;
            j["cases"] = cases;
            j["contract_ok"] = ok;
            ctx.write_json("embed.json", j);
            return ok ? 0 : 3;
        };
    }

    // selftest
    {
        Command& c = make("selftest", "closed-form checks of every module");
        c.run = [&](Context& ctx) {
            bool ok = true;
            auto checks = selftest_checks(ok);
            auto j = ctx.header("selftest");
            j["checks"] = checks;
            j["contract_ok"] = ok;
            ctx.write_json("selftest.json", j);
            return ok ? 0 : 3;
        };
    }

    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        if (!args.empty() && commands.count(args.front())) {
            const Command& cmd = commands.at(args.front());
            std::string path;
            for (std::size_t i = 1; i < args.size(); ++i) {
                if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
                else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
            }
            if (!path.empty()) {
                auto injected = config_args(path, cmd);
                args.insert(args.begin() + 1, injected.begin(), injected.end());
            }
        }
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }

    const auto start = std::chrono::steady_clock::now();
    std::string name;
    for (auto& [n, c] : commands)
        if (c.app->parsed()) name = n;
    const Command& cmd = commands.at(name);

    std::string canonical = "command=" + name + "\n";
    json config = json::object();
    for (const auto& [k, v] : cmd.resolved()) {
        canonical += k + "=" + v + "\n";
        config[k] = v;
    }

    Context ctx;
    ctx.hash = hex64(fnv1a64(canonical));
    ctx.out = out_dir;
    int code = 0;
    try {
        set_num_threads(threads);
        std::error_code ec;
        fs::create_directories(ctx.out, ec);
        if (ec || !fs::is_directory(ctx.out)) throw ConfigError("out: cannot create directory '" + out_dir + "'");
        code = cmd.run(ctx);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const InvalidArgument& e) {
        std::cerr << "rejected: " << e.what() << "\n";
        return 2;
    } catch (const ContractViolation& e) {
        std::cerr << "contract violation: " << e.what() << "\n";
        code = 3;
    }

    json manifest = {{"schema_version", schema_version},
                     {"tool", "tfq"},
                     {"versions",
                      {{"tfq", tool_version},
                       {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                     std::to_string(EIGEN_MINOR_VERSION)},
                       {"cli11", CLI11_VERSION},
                       {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                             std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                             std::to_string(NLOHMANN_JSON_VERSION_PATCH)}}},
                     {"command", name},
                     {"config_hash", ctx.hash},
                     {"config", config},
                     {"artifacts", ctx.artifacts},
                     {"exit_code", code}};
    if (record_timings) {
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        manifest["timings"] = {{"total_seconds", secs}, {"threads", threads}};
    }
    std::ofstream(ctx.out / "manifest.json", std::ios::binary) << manifest.dump(2) << "\n";
    if (code == 3) std::cerr << name << ": numerical contract violated, see " << (ctx.out / (name + ".json")).string() << "\n";
    return code;
}

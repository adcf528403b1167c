#include "triconv/classical.hpp"
#include "triconv/coherify.hpp"
#include "triconv/io.hpp"
#include "triconv/qchannel.hpp"
#include "triconv/qubitconv.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

using nlohmann::json;
using namespace triconv;

constexpr const char* kVersion = "triconv 1.0.0";

struct GlobalOpts {
    double tol = 1e-9;
    std::uint64_t seed = kDefaultSeed;
    std::string format = "json";
    std::string output;
    bool tol_set = false;
};

void emit(const GlobalOpts& g, const json& j, const std::string& table) {
    std::string text = (g.format == "table" && !table.empty()) ? table : j.dump(2) + "\n";
    if (g.output.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(g.output);
        if (!out) throw IoError("cannot write '" + g.output + "'");
        out << text;
    }
}

json indices_1based(const IndexSet& s) {
    json arr = json::array();
    for (int v : s.members) arr.push_back(v + 1);
    return arr;
}

int run_tensor_check(const GlobalOpts& g, const std::string& file) {
    StochTensor t = tensor_from_json(load_json_file(file));
    AxisReport rep = validate(t);
    json axes = json::array();
    for (const auto& ax : rep.axes)
        axes.push_back({{"axis", ax.axis + 1}, {"max_marginal_deviation", ax.max_deviation}});
    json j{{"classification", rep.classification()},
           {"axes", axes},
           {"min_entry", rep.min_entry},
           {"max_binary_deviation", rep.max_binary_deviation}};
    std::ostringstream table;
    table << rep.classification() << "\n";
    for (const auto& ax : rep.axes)
        table << "axis " << ax.axis + 1 << ": max marginal deviation " << ax.max_deviation << "\n";
    table << "min entry " << rep.min_entry << "\n";
    emit(g, j, table.str());
    return 0;
}

int run_tensor_eigenvectors(const GlobalOpts& g, const std::string& file) {
    StochTensor t = tensor_from_json(load_json_file(file));
    auto eigs = probability_eigenvectors(t);
    json arr = json::array();
    for (const auto& e : eigs) {
        json item = to_json(e.vector);
        item["eigenvalue"] = e.eigenvalue;
        item["zero_set"] = indices_1based(e.zero_set);
        arr.push_back(std::move(item));
    }
    emit(g, json{{"eigenvectors", arr}}, "");
    return 0;
}

int run_tensor_identity(const GlobalOpts& g, const std::string& file) {
    StochTensor t = tensor_from_json(load_json_file(file));
    auto id = find_identity(t);
    if (!id) {
        emit(g, json{{"identity", nullptr}}, "no identity\n");
        return 0;
    }
    json j = json{{"identity", to_json(*id)}, {"basis_index", *id->delta_index() + 1}};
    emit(g, j, "identity: basis vector " + std::to_string(*id->delta_index() + 1) + "\n");
    return 0;
}

int run_tensor_inverse(const GlobalOpts& g, const std::string& file, int basis,
                       const std::string& vec_file) {
    StochTensor t = tensor_from_json(load_json_file(file));
    if (vec_file.empty() && (basis < 1 || basis > t.dim()))
        throw ValidationError("--basis must lie in 1.." + std::to_string(t.dim()));
    ProbVector p = vec_file.empty() ? ProbVector::basis(t.dim(), basis - 1)
                                    : prob_vector_from_json(load_json_file(vec_file));
    auto inv = find_inverse(t, p);
    if (!inv) {
        emit(g, json{{"inverse", nullptr}}, "no inverse\n");
        return 0;
    }
    emit(g, json{{"inverse", to_json(*inv)}, {"basis_index", *inv->delta_index() + 1}},
         "inverse: basis vector " + std::to_string(*inv->delta_index() + 1) + "\n");
    return 0;
}

int run_tensor_reduce(const GlobalOpts& g, const std::string& file) {
    StochTensor t = tensor_from_json(load_json_file(file));
    auto sets = find_reducing_sets(t);
    json arr = json::array();
    for (const auto& s : sets) {
        StochTensor sub = truncate(t, s);
        arr.push_back({{"set", indices_1based(s)},
                       {"truncated_dim", sub.dim()},
                       {"truncated_m_stochastic", validate(sub).is_m_stochastic()}});
    }
    emit(g, json{{"reducing_sets", arr}}, "");
    return 0;
}

int run_convolve_classical(const GlobalOpts& g, const std::string& tensor_file,
                           const std::string& p_file, const std::string& q_file) {
    StochTensor t = tensor_from_json(load_json_file(tensor_file));
    ProbVector p = prob_vector_from_json(load_json_file(p_file));
    ProbVector q = prob_vector_from_json(load_json_file(q_file));
    emit(g, to_json(convolve(t, p, q)), "");
    return 0;
}

int run_convolve_quantum(const GlobalOpts& g, const std::string& choi_file,
                         const std::string& rho_file, const std::string& sigma_file,
                         bool check_diagonal) {
    DynamicalMatrix d = dynamical_from_json(load_json_file(choi_file));
    DensityMatrix rho = density_from_json(load_json_file(rho_file));
    DensityMatrix sigma = density_from_json(load_json_file(sigma_file));
    DensityMatrix out = quantum_convolve(d, rho, sigma);
    json j = to_json(out);
    if (check_diagonal) {
        // classical tensor read off the Choi diagonal
        std::vector<double> entries(static_cast<size_t>(d.side()));
        for (int i = 0; i < d.side(); ++i)
            entries[static_cast<size_t>(i)] = std::max(d.matrix(i, i).real(), 0.0);
        StochTensor t(d.parts, d.local_dim, std::move(entries));
        ProbVector classical =
            convolve(t, ProbVector(rho.diagonal()), ProbVector(sigma.diagonal()));
        double dev = (out.diagonal() - classical.entries).cwiseAbs().maxCoeff();
        j["diagonal_consistency_deviation"] = dev;
    }
    emit(g, j, "");
    return 0;
}

int run_coherify(const GlobalOpts& g, const std::string& file, const std::string& scheme,
                 const std::string& blocks_file, const std::string& out_choi,
                 const std::string& out_kraus) {
    StochTensor t = tensor_from_json(load_json_file(file));
    DynamicalMatrix choi;
    std::optional<KrausSet> kraus;
    if (scheme == "diagonal") {
        choi = coherify_diagonal(t);
    } else {
        BlockScheme bs = scheme.empty() ? default_scheme_for(t.dim())  // mub if prime, else fourier
                                        : block_scheme_from_string(scheme);
        BlockBasisFamily basis = blocks_file.empty() ? default_blocks(t.dim(), bs)
                                                     : blocks_from_json(load_json_file(blocks_file));
        Coherification c = coherify_permutation(t, basis);
        choi = std::move(c.choi);
        kraus = std::move(c.kraus);
    }
    CoherenceReport rep = coherence_report(choi);
    if (!out_choi.empty()) write_json_file(out_choi, to_json(choi));
    if (kraus && !out_kraus.empty()) write_json_file(out_kraus, to_json(*kraus));
    emit(g, to_json(rep), coherence_report_table(rep));
    return 0;
}

json matrix_json(const CMat& m) {
    json re = json::array(), im = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json rr = json::array(), ir = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            rr.push_back(m(i, c).real());
            ir.push_back(m(i, c).imag());
        }
        re.push_back(rr);
        im.push_back(ir);
    }
    return json{{"re", re}, {"im", im}};
}

int run_qubit_u4(const GlobalOpts& g, double alpha, double theta, double phi) {
    emit(g, matrix_json(u4(ConvParams(alpha, theta, phi))), "");
    return 0;
}

int run_qubit_circuit(const GlobalOpts& g, double alpha, double theta, double phi,
                      std::string fmt) {
    if (fmt.empty()) fmt = (g.format == "qasm" || g.format == "text") ? g.format : "text";
    GateCircuit c = decompose_u4(ConvParams(alpha, theta, phi));
    std::string text = fmt == "qasm" ? circuit_qasm(c) : circuit_text(c);
    if (g.output.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(g.output);
        if (!out) throw IoError("cannot write '" + g.output + "'");
        out << text;
    }
    return 0;
}

int run_qubit_metrics(const GlobalOpts& g, double alpha, double theta, double phi,
                      std::uint64_t mc_samples) {
    ConvParams p(alpha, theta, phi);
    ConvMetrics m = conv_metrics(p);
    json j{{"theta", p.theta}, {"e_p", m.entangling_power}, {"g_t", m.gate_typicality}};
    std::ostringstream table;
    table << "theta " << p.theta << "\ne_p   " << m.entangling_power << "\ng_t   "
          << m.gate_typicality << "\n";
    if (mc_samples > 0) {
        McEstimate est = mc_entangling_power(u4(p), mc_samples, g.seed);
        j["mc_e_p"] = est.value;
        j["mc_stderr"] = est.stderr_;
        j["seed"] = g.seed;
        table << "mc_e_p " << est.value << " +- " << est.stderr_ << " (seed " << g.seed << ")\n";
    }
    emit(g, j, table.str());
    return 0;
}

int run_qubit_mitigate(const GlobalOpts& g, double alpha, double theta, double phi, int state,
                       int trials) {
    ConvParams p(alpha, theta, phi);
    Rng rng = make_rng(g.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    CVec psi = CVec::Zero(2);
    psi(state) = 1.0;
    double min_f = 1.0, sum_f = 0.0, max_closed_dev = 0.0;
    for (int t = 0; t < trials; ++t) {
        NoiseVector r{gauss(rng), gauss(rng), gauss(rng)};
        double f = mitigation_pipeline(p, r, psi);
        min_f = std::min(min_f, f);
        sum_f += f;
        max_closed_dev = std::max(max_closed_dev,
                                  std::abs(f - mitigation_closed_form(p.theta, r, state)));
    }
    json j{{"state", state},          {"theta", p.theta},
           {"trials", trials},        {"seed", g.seed},
           {"min_fidelity", min_f},   {"mean_fidelity", sum_f / trials},
           {"max_closed_form_deviation", max_closed_dev}};
    std::ostringstream table;
    table << "state |" << state << ">  theta " << p.theta << "  trials " << trials << " (seed "
          << g.seed << ")\nmin fidelity  " << min_f << "\nmean fidelity " << sum_f / trials
          << "\nmax closed-form deviation " << max_closed_dev << "\n";
    emit(g, j, table.str());
    return 0;
}

int run_qubit_plane(const GlobalOpts& g, int points) {
    std::ostringstream os;
    os.precision(17);
    os << "theta,e_p,g_t\n";
    for (int i = 0; i < points; ++i) {
        const double theta = -M_PI + 2.0 * M_PI * i / (points - 1);
        ConvMetrics m = conv_metrics(ConvParams(0.0, theta, 0.0));
        os << theta << "," << m.entangling_power << "," << m.gate_typicality << "\n";
    }
    if (g.output.empty()) {
        std::cout << os.str();
    } else {
        std::ofstream out(g.output);
        if (!out) throw IoError("cannot write '" + g.output + "'");
        out << os.str();
    }
    return 0;
}

int run_qubit_entropy(const GlobalOpts& g, int points, int steps, int trials, bool fresh) {
    std::ostringstream os;
    os.precision(12);
    os << "theta,mean_entropy\n";
    for (int i = 0; i < points; ++i) {
        const double theta = -M_PI + 2.0 * M_PI * i / (points - 1);
        os << theta << ","
           << convolution_entropy_growth(ConvParams(0.0, theta, 0.0), steps, trials, g.seed, fresh)
           << "\n";
    }
    std::ostringstream note;
    note << "# scheme: " << (fresh ? "fresh Haar partner each step" : "self-convolution")
         << ", steps " << steps << ", trials " << trials << ", seed " << g.seed << "\n";
    if (g.output.empty()) {
        std::cout << note.str() << os.str();
    } else {
        std::ofstream out(g.output);
        if (!out) throw IoError("cannot write '" + g.output + "'");
        out << note.str() << os.str();
    }
    return 0;
}

int run_qubit_gates(const GlobalOpts& g) {
    json arr = json::array();
    std::ostringstream table;
    for (const auto& f : dcnot_convention_report()) {
        arr.push_back({{"point", f.point},
                       {"arg_order", f.arg_order},
                       {"target", f.target},
                       {"distance", f.distance},
                       {"matches", f.matches}});
        if (f.matches)
            table << f.point << " under " << f.arg_order << " equals " << f.target
                  << " up to a global phase\n";
    }
    emit(g, json{{"findings", arr}}, table.str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tristochastic tensor operations, quantum convolutions and coherifications"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOpts g;
    app.add_option("--tol", g.tol, "override structural tolerance")
        ->envname("TRICONV_TOL")
        ->each([&](const std::string&) { g.tol_set = true; });
    app.add_option("--seed", g.seed, "seed for randomized commands");
    app.add_option("--format", g.format, "output format (json|table|csv; circuit: text|qasm)")
        ->check(CLI::IsMember({"json", "table", "csv", "text", "qasm"}));
    app.add_option("-o,--output", g.output, "write output to a file instead of stdout");

    std::string file, vec_file, blocks_file, out_choi, out_kraus, scheme;
    std::string p_file, q_file, circuit_fmt;
    int basis = 1, state = 1, trials = 100, points = 61;
    bool check_diagonal = false;
    double alpha = 0.0, theta = 0.0, phi = 0.0;
    std::uint64_t mc_samples = 0;

    auto* tensor = app.add_subcommand("tensor", "classical tensor operations");
    tensor->require_subcommand(1);
    auto* t_check = tensor->add_subcommand("check", "validate marginals and classify");
    t_check->add_option("file", file)->required();
    auto* t_eig = tensor->add_subcommand("eigenvectors", "probability eigenvectors");
    t_eig->add_option("file", file)->required();
    auto* t_id = tensor->add_subcommand("identity", "find the convolution identity");
    t_id->add_option("file", file)->required();
    auto* t_inv = tensor->add_subcommand("inverse", "invert a probability vector");
    t_inv->add_option("file", file)->required();
    t_inv->add_option("--basis", basis, "1-based basis index of p");
    t_inv->add_option("--vector", vec_file, "probability vector JSON for p");
    auto* t_red = tensor->add_subcommand("reduce", "reducing sets and truncations");
    t_red->add_option("file", file)->required();

    auto* conv = app.add_subcommand("convolve", "convolution of vectors or states");
    conv->require_subcommand(1);
    auto* c_cl = conv->add_subcommand("classical", "p *_A q");
    c_cl->add_option("tensor", file)->required();
    c_cl->add_option("p", p_file)->required();
    c_cl->add_option("q", q_file)->required();
    auto* c_q = conv->add_subcommand("quantum", "rho *_D sigma");
    c_q->add_option("choi", file)->required();
    c_q->add_option("rho", p_file)->required();
    c_q->add_option("sigma", q_file)->required();
    c_q->add_flag("--check-diagonal", check_diagonal, "cross-validate diagonal action");

    auto* coh = app.add_subcommand("coherify", "coherify a stochastic tensor");
    coh->add_option("file", file)->required();
    coh->add_option("--scheme", scheme, "diagonal|identity|fourier|mub (default: mub for prime N, else fourier)")
        ->check(CLI::IsMember({"diagonal", "identity", "fourier", "mub", "custom"}));
    coh->add_option("--blocks", blocks_file, "block family JSON (scheme custom)");
    coh->add_option("--out-choi", out_choi);
    coh->add_option("--out-kraus", out_kraus);

    auto* qubit = app.add_subcommand("qubit", "two-qubit convolution family");
    qubit->require_subcommand(1);
    auto add_params = [&](CLI::App* sub) {
        sub->add_option("--alpha", alpha);
        sub->add_option("--theta", theta);
        sub->add_option("--phi", phi);
    };
    auto* q_u4 = qubit->add_subcommand("u4", "the unitary matrix");
    add_params(q_u4);
    auto* q_circ = qubit->add_subcommand("circuit", "universal-gate decomposition");
    add_params(q_circ);
    q_circ->add_option("--circuit-format", circuit_fmt)->check(CLI::IsMember({"text", "qasm"}));
    auto* q_met = qubit->add_subcommand("metrics", "entangling power and gate typicality");
    add_params(q_met);
    q_met->add_option("--mc-samples", mc_samples, "add a Monte-Carlo estimate");
    auto* q_mit = qubit->add_subcommand("mitigate", "correlated-noise fidelity scan");
    add_params(q_mit);
    q_mit->add_option("--state", state)->check(CLI::IsMember({0, 1}));
    q_mit->add_option("--trials", trials)->check(CLI::PositiveNumber);
    auto* q_plane = qubit->add_subcommand("plane", "theta sweep CSV of e_p and g_t");
    q_plane->add_option("--points", points)->check(CLI::Range(2, 100001));
    auto* q_gates = qubit->add_subcommand("gates", "special-point gate conventions");
    int ent_steps = 4, ent_trials = 200;
    bool ent_fresh = false;
    auto* q_ent = qubit->add_subcommand(
        "entropy", "exploratory: mean output entropy after repeated convolutions, per theta");
    q_ent->add_option("--points", points)->check(CLI::Range(2, 100001));
    q_ent->add_option("--steps", ent_steps)->check(CLI::PositiveNumber);
    q_ent->add_option("--trials", ent_trials)->check(CLI::PositiveNumber);
    q_ent->add_flag("--fresh", ent_fresh, "convolve with a fresh random state each step");

    CLI11_PARSE(app, argc, argv);

    if (g.tol_set) {
        tols().structural = g.tol;
        tols().herm = g.tol;
        tols().psd = g.tol;
    }

    try {
        if (t_check->parsed()) return run_tensor_check(g, file);
        if (t_eig->parsed()) return run_tensor_eigenvectors(g, file);
        if (t_id->parsed()) return run_tensor_identity(g, file);
        if (t_inv->parsed()) return run_tensor_inverse(g, file, basis, vec_file);
        if (t_red->parsed()) return run_tensor_reduce(g, file);
        if (c_cl->parsed()) return run_convolve_classical(g, file, p_file, q_file);
        if (c_q->parsed()) return run_convolve_quantum(g, file, p_file, q_file, check_diagonal);
        if (coh->parsed()) return run_coherify(g, file, scheme, blocks_file, out_choi, out_kraus);
        if (q_u4->parsed()) return run_qubit_u4(g, alpha, theta, phi);
        if (q_circ->parsed()) return run_qubit_circuit(g, alpha, theta, phi, circuit_fmt);
        if (q_met->parsed()) return run_qubit_metrics(g, alpha, theta, phi, mc_samples);
        if (q_mit->parsed()) return run_qubit_mitigate(g, alpha, theta, phi, state, trials);
        if (q_plane->parsed()) return run_qubit_plane(g, points);
        if (q_gates->parsed()) return run_qubit_gates(g);
        if (q_ent->parsed()) return run_qubit_entropy(g, points, ent_steps, ent_trials, ent_fresh);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

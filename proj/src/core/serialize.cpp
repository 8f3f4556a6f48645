#include "serialize.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace relubias {

using nlohmann::json;

namespace {

json spectrum_to_json_obj(const Spectrum& s) {
    json j;
    j["kind"] = to_string(s.kind);
    j["d"] = s.d();
    switch (s.kind) {
        case SpectrumKind::Isotropic:
            break;
        case SpectrumKind::Geometric:
            j["ratio"] = s.d() > 1 ? s.lambda(1) / s.lambda(0) : 1.0;
            break;
        case SpectrumKind::Explicit: {
            std::vector<double> v(s.lambda.data(), s.lambda.data() + s.d());
            j["lambda"] = v;
            break;
        }
    }
    return j;
}

Spectrum spectrum_from_json_obj(const json& j) {
    const auto kind = spectrum_kind_from_string(j.at("kind").get<std::string>());
    const int d = j.at("d").get<int>();
    switch (kind) {
        case SpectrumKind::Isotropic:
            return make_spectrum(kind, d);
        case SpectrumKind::Geometric:
            return make_spectrum(kind, d, {j.at("ratio").get<double>()});
        case SpectrumKind::Explicit:
            return make_spectrum(kind, d, j.at("lambda").get<std::vector<double>>());
    }
    throw SchemaError("spectrum: unknown kind");
}

}  // namespace

std::string dataset_to_json(const Dataset& ds) {
    json j;
    j["n"] = ds.n();
    j["d"] = ds.d();
    j["seed"] = ds.seed;
    j["z_dist"] = to_string(ds.z_dist);
    j["spectrum"] = spectrum_to_json_obj(ds.spectrum);
    std::vector<double> x(ds.n() * static_cast<size_t>(ds.d()));
    for (int i = 0; i < ds.n(); ++i)
        for (int c = 0; c < ds.d(); ++c) x[static_cast<size_t>(i) * ds.d() + c] = ds.X(i, c);
    j["X"] = x;
    std::vector<double> y(ds.y.data(), ds.y.data() + ds.n());
    j["y"] = y;
    return j.dump();
}

Dataset dataset_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw SchemaError(std::string("dataset JSON parse error: ") + e.what());
    }
    try {
        Dataset ds;
        const int n = j.at("n").get<int>();
        const int d = j.at("d").get<int>();
        ds.seed = j.at("seed").get<std::uint64_t>();
        ds.z_dist = z_dist_from_string(j.at("z_dist").get<std::string>());
        ds.spectrum = spectrum_from_json_obj(j.at("spectrum"));
        auto x = j.at("X").get<std::vector<double>>();
        auto y = j.at("y").get<std::vector<double>>();
        if (static_cast<int>(y.size()) != n || static_cast<long>(x.size()) != static_cast<long>(n) * d)
            throw SchemaError("dataset JSON: array sizes disagree with n, d");
        ds.X.resize(n, d);
        ds.y.resize(n);
        for (int i = 0; i < n; ++i) {
            ds.y(i) = y[i];
            for (int c = 0; c < d; ++c) ds.X(i, c) = x[static_cast<size_t>(i) * d + c];
        }
        ds.finalize();
        return ds;
    } catch (const json::exception& e) {
        throw SchemaError(std::string("dataset JSON schema error: ") + e.what());
    }
}

std::string dataset_to_csv(const Dataset& ds) {
    std::ostringstream out;
    out << "row,label";
    for (int c = 0; c < ds.d(); ++c) out << ",x" << c;
    out << "\n";
    for (int i = 0; i < ds.n(); ++i) {
        out << i << "," << format_double(ds.y(i));
        for (int c = 0; c < ds.d(); ++c) out << "," << format_double(ds.X(i, c));
        out << "\n";
    }
    return out.str();
}

std::string model_to_json(const ModelState& m) {
    json j;
    j["signs"] = m.signs;
    std::vector<std::vector<double>> ws;
    for (const auto& w : m.weights) ws.emplace_back(w.data(), w.data() + w.size());
    j["weights"] = ws;
    j["iter"] = m.iter;
    return j.dump();
}

ModelState model_from_json(const std::string& text) {
    try {
        json j = json::parse(text);
        ModelState m;
        m.signs = j.at("signs").get<std::vector<int>>();
        for (const auto& wj : j.at("weights")) {
            auto v = wj.get<std::vector<double>>();
            m.weights.push_back(Eigen::Map<const Vec>(v.data(), v.size()));
        }
        m.iter = j.at("iter").get<long>();
        m.validate();
        return m;
    } catch (const json::exception& e) {
        throw SchemaError(std::string("model JSON schema error: ") + e.what());
    }
}

std::string trajectory_to_csv(const Trajectory& traj) {
    std::ostringstream out;
    out << "t,neuron,example,beta,alpha,active,risk\n";
    for (const auto& s : traj.snapshots)
        for (int k = 0; k < s.beta.rows(); ++k)
            for (int i = 0; i < s.beta.cols(); ++i)
                out << s.t << "," << k << "," << i << "," << format_double(s.beta(k, i)) << ","
                    << format_double(s.alpha(k, i)) << "," << s.mask(k, i) << ","
                    << format_double(s.risk) << "\n";
    return out.str();
}

Trajectory trajectory_from_csv(const std::string& text, double eta,
                               const std::vector<int>& signs) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "t,neuron,example,beta,alpha,active,risk")
        throw SchemaError("trajectory CSV: bad header");

    struct Row {
        long t;
        int k, i, active;
        double beta, alpha, risk;
    };
    std::vector<Row> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        Row r;
        char c;
        std::istringstream ls(line);
        if (!(ls >> r.t >> c >> r.k >> c >> r.i >> c >> r.beta >> c >> r.alpha >> c >> r.active >>
              c >> r.risk))
            throw SchemaError("trajectory CSV: malformed row");
        rows.push_back(r);
    }
    if (rows.empty()) throw SchemaError("trajectory CSV: no rows");

    const int m = static_cast<int>(signs.size());
    int n = 0;
    for (const auto& r : rows)
        if (r.t == rows.front().t) n = std::max(n, r.i + 1);
    if (n <= 0 || rows.size() % (static_cast<size_t>(m) * n) != 0)
        throw SchemaError("trajectory CSV: truncated or inconsistent row count");

    Trajectory traj;
    traj.eta = eta;
    traj.signs = signs;
    const size_t per_snap = static_cast<size_t>(m) * n;
    for (size_t off = 0; off < rows.size(); off += per_snap) {
        Snapshot s;
        s.t = rows[off].t;
        s.beta.resize(m, n);
        s.alpha.resize(m, n);
        s.mask.resize(m, n);
        s.risk = rows[off].risk;
        for (size_t r = 0; r < per_snap; ++r) {
            const Row& row = rows[off + r];
            if (row.t != s.t) throw SchemaError("trajectory CSV: truncated snapshot block");
            if (row.k < 0 || row.k >= m || row.i < 0 || row.i >= n)
                throw SchemaError("trajectory CSV: index out of range");
            s.beta(row.k, row.i) = row.beta;
            s.alpha(row.k, row.i) = row.alpha;
            s.mask(row.k, row.i) = row.active;
        }
        traj.snapshots.push_back(std::move(s));
    }
    for (size_t si = 1; si < traj.snapshots.size(); ++si) {
        const long dt = traj.snapshots[si].t - traj.snapshots[si - 1].t;
        if (dt <= 0) throw SchemaError("trajectory CSV: non-increasing t");
        if (si == 1)
            traj.log_stride = static_cast<int>(dt);
        else if (dt != traj.log_stride)
            throw SchemaError("trajectory CSV: irregular logging stride");
    }
    return traj;
}

std::string trajectory_summary_json(const Trajectory& traj, std::optional<long> t0) {
    json j;
    if (t0)
        j["t0"] = *t0;
    else
        j["t0"] = nullptr;
    j["final_risk"] = traj.final_risk();
    j["iters"] = traj.iters();
    j["eta"] = traj.eta;
    j["stop_reason"] = traj.stop_reason;
    return j.dump();
}

std::string ledger_to_csv(const ConditionLedger& ledger) {
    std::ostringstream out;
    out << "t,condition,holds,margin\n";
    for (size_t ti = 0; ti < ledger.ts.size(); ++ti)
        for (size_t ci = 0; ci < ledger.names.size(); ++ci)
            out << ledger.ts[ti] << "," << ledger.names[ci] << ","
                << (ledger.holds[ti][ci] ? 1 : 0) << "," << format_double(ledger.margins[ti][ci])
                << "\n";
    return out.str();
}

std::string minnorm_to_json(const MinNormSolution& sol) {
    json j;
    j["objective"] = sol.objective;
    std::vector<std::vector<double>> ws;
    for (const auto& w : sol.weights) ws.emplace_back(w.data(), w.data() + w.size());
    j["weights"] = ws;
    if (sol.weights.size() == 1)
        j["subset_or_partition"] = sol.subset;
    else
        j["subset_or_partition"] = sol.partition;
    json mult;
    mult["stationarity"] = std::vector<double>(sol.mult_eq.data(),
                                               sol.mult_eq.data() + sol.mult_eq.size());
    if (sol.mult_ineq.size() > 0)
        mult["mu"] = std::vector<double>(sol.mult_ineq.data(),
                                         sol.mult_ineq.data() + sol.mult_ineq.size());
    j["multipliers"] = mult;
    j["kkt_residual"] = sol.kkt_residual;
    j["solver"] = sol.solver;
    if (!sol.tied_certificates.empty()) j["tied_certificates"] = sol.tied_certificates;
    return j.dump();
}

std::string assumption_report_to_json(const AssumptionReport& r) {
    json j;
    j["labels_ok"] = r.labels_ok;
    j["label_margin_low"] = r.label_margin_low;
    j["label_margin_high"] = r.label_margin_high;
    j["highdim_ok"] = r.highdim_ok;
    j["d2"] = r.d2;
    j["d2_threshold"] = r.d2_threshold;
    j["d2_margin"] = r.d2_margin;
    j["dinf"] = r.dinf;
    j["dinf_threshold"] = r.dinf_threshold;
    j["dinf_margin"] = r.dinf_margin;
    return j.dump();
}

std::string gram_report_to_json(const GramReport& g, const EigenReport& e) {
    json j;
    j["deviation"] = g.deviation;
    j["envelope"] = g.envelope;
    j["ratio"] = g.ratio;
    j["mu_n"] = e.mu_n;
    j["mu_1"] = e.mu_1;
    j["cg_hat"] = e.cg_hat;
    return j.dump();
}

std::string constants_to_json(const Constants& c) {
    json j;
    j["C_g"] = c.C_g;
    j["C_y"] = c.C_y;
    j["C_alpha"] = c.C_alpha;
    j["C_0"] = c.C_0;
    j["C"] = c.C;
    return j.dump();
}

std::string verify_report_to_json(const VerifyReport& r) {
    json j;
    j["pass"] = r.pass;
    j["gram_condition"] = r.gram_condition;
    json checks;
    for (const auto& [name, ck] : r.checks) {
        json c;
        c["value"] = ck.value;
        c["threshold"] = ck.threshold;
        c["pass"] = ck.pass;
        checks[name] = c;
    }
    j["checks"] = checks;
    return j.dump();
}

std::string bound_report_to_json(const BoundReport& r) {
    json j;
    j["distance"] = r.distance;
    j["lower_bound"] = r.lower_bound;
    j["upper_bound"] = r.upper_bound;
    j["within"] = r.within;
    j["bounds_consistent"] = r.bounds_consistent;
    j["constants_used"] = nlohmann::json::parse(constants_to_json(r.constants_used));
    json ctx;
    ctx["n"] = r.n;
    ctx["n_other"] = r.n_other;
    ctx["d"] = r.d;
    ctx["lambda_l1"] = r.lambda_l1;
    ctx["y_min"] = r.y_min;
    ctx["y_max"] = r.y_max;
    j["context"] = ctx;
    return j.dump();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw NumericError("cannot write file: " + path);
    out << content;
}

}  // namespace relubias

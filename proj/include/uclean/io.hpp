#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "claims.hpp"
#include "model.hpp"
#include "quality.hpp"

#include "json.hpp"

namespace uclean {

namespace io_detail {

inline std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline double parse_real(const std::string& s, int line) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ValidationError("line " + std::to_string(line) + ": cannot parse number '" + s + "'");
    }
}

} // namespace io_detail

// dist tokens: normal(<mu>,<sigma>) or discrete(v1:p1|v2:p2|...)
inline Dist parse_dist(const std::string& token, int line) {
    std::string t = io_detail::trim(token);
    auto open = t.find('(');
    if (open == std::string::npos || t.back() != ')')
        throw ValidationError("line " + std::to_string(line) + ": malformed dist token '" + t + "'");
    std::string kind = t.substr(0, open);
    std::string body = t.substr(open + 1, t.size() - open - 2);
    if (kind == "normal") {
        auto comma = body.find(',');
        if (comma == std::string::npos)
            throw ValidationError("line " + std::to_string(line) + ": normal(...) needs mu,sigma");
        double mu = io_detail::parse_real(io_detail::trim(body.substr(0, comma)), line);
        double sigma = io_detail::parse_real(io_detail::trim(body.substr(comma + 1)), line);
        if (sigma < 0)
            throw ValidationError("line " + std::to_string(line) + ": negative sigma");
        return NormalSpec{mu, sigma};
    }
    if (kind == "discrete") {
        DiscreteDist d;
        std::stringstream ss(body);
        std::string atom;
        while (std::getline(ss, atom, '|')) {
            auto colon = atom.find(':');
            if (colon == std::string::npos)
                throw ValidationError("line " + std::to_string(line) + ": malformed atom '" + atom +
                                      "' (expected value:prob)");
            double v = io_detail::parse_real(io_detail::trim(atom.substr(0, colon)), line);
            double p = io_detail::parse_real(io_detail::trim(atom.substr(colon + 1)), line);
            d.support.emplace_back(v, p);
        }
        if (d.support.empty())
            throw ValidationError("line " + std::to_string(line) + ": empty discrete support");
        return d;
    }
    throw ValidationError("line " + std::to_string(line) + ": unknown dist kind '" + kind + "'");
}

inline std::string format_dist(const Dist& d) {
    std::ostringstream os;
    os.precision(17);
    if (auto* n = std::get_if<NormalSpec>(&d)) {
        os << "normal(" << n->mean << ',' << n->stddev << ')';
    } else {
        os << "discrete(";
        const auto& sup = std::get<DiscreteDist>(d).support;
        for (std::size_t i = 0; i < sup.size(); ++i) {
            if (i) os << '|';
            os << sup[i].first << ':' << sup[i].second;
        }
        os << ')';
    }
    return os.str();
}

inline Dataset read_dataset_csv(std::istream& in) {
    Dataset ds;
    std::string line;
    int lineno = 0;
    if (!std::getline(in, line)) throw ValidationError("dataset file is empty");
    ++lineno;
    if (io_detail::trim(line) != "id,current_value,cost,dist")
        throw ValidationError("line 1: expected header 'id,current_value,cost,dist', got '" +
                              io_detail::trim(line) + "'");
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = io_detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        // the dist column may itself contain commas; split the first three only
        std::vector<std::string> cols;
        std::size_t pos = 0;
        for (int k = 0; k < 3; ++k) {
            auto comma = t.find(',', pos);
            if (comma == std::string::npos)
                throw ValidationError("line " + std::to_string(lineno) + ": expected 4 columns");
            cols.push_back(t.substr(pos, comma - pos));
            pos = comma + 1;
        }
        cols.push_back(t.substr(pos));
        UncertainObject o;
        o.id = io_detail::trim(cols[0]);
        o.current_value = io_detail::parse_real(io_detail::trim(cols[1]), lineno);
        o.cost = io_detail::parse_real(io_detail::trim(cols[2]), lineno);
        o.dist = parse_dist(cols[3], lineno);
        ds.objects.push_back(std::move(o));
    }
    auto errors = validate_dataset(ds);
    if (!errors.empty()) {
        std::string msg = "dataset validation failed:";
        for (auto& e : errors) msg += "\n  - " + e;
        throw ValidationError(msg);
    }
    return ds;
}

inline Dataset read_dataset_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ValidationError("cannot open dataset file '" + path + "'");
    return read_dataset_csv(f);
}

inline void write_dataset_csv(std::ostream& os, const Dataset& ds) {
    os << "id,current_value,cost,dist\n";
    os.precision(17);
    for (const auto& o : ds.objects)
        os << o.id << ',' << o.current_value << ',' << o.cost << ',' << format_dist(o.dist) << '\n';
}

// Sidecar covariance CSV: header i,j,cov with 0-based indices; symmetric
// entries may be given once.
inline std::vector<std::vector<double>> read_covariance_csv(std::istream& in, int n) {
    std::vector<std::vector<double>> cov(n, std::vector<double>(n, 0.0));
    std::string line;
    int lineno = 0;
    if (!std::getline(in, line)) throw ValidationError("covariance file is empty");
    ++lineno;
    if (io_detail::trim(line) != "i,j,cov")
        throw ValidationError("line 1: expected header 'i,j,cov'");
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = io_detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        std::stringstream ss(t);
        std::string a, b, c;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, c))
            throw ValidationError("line " + std::to_string(lineno) + ": expected 3 columns");
        int i = static_cast<int>(io_detail::parse_real(io_detail::trim(a), lineno));
        int j = static_cast<int>(io_detail::parse_real(io_detail::trim(b), lineno));
        if (i < 0 || j < 0 || i >= n || j >= n)
            throw ValidationError("line " + std::to_string(lineno) + ": index out of range");
        double v = io_detail::parse_real(io_detail::trim(c), lineno);
        cov[i][j] = v;
        cov[j][i] = v;
    }
    return cov;
}

inline void write_covariance_csv(std::ostream& os, const std::vector<std::vector<double>>& cov) {
    os << "i,j,cov\n";
    os.precision(17);
    for (std::size_t i = 0; i < cov.size(); ++i)
        for (std::size_t j = i; j < cov.size(); ++j)
            if (cov[i][j] != 0 || i == j) os << i << ',' << j << ',' << cov[i][j] << '\n';
}

struct ClaimsFile {
    ClaimSystem system;
    double tau = 0;
    bool tau_given = false;
    std::vector<std::string> warnings;
};

inline Claim parse_claim_json(const nlohmann::json& j, int n) {
    std::string type = j.at("type").get<std::string>();
    if (type == "window") {
        WindowAggregateClaim c;
        // JSON positions are 1-based
        c.left_start = j.at("left").get<int>() - 1;
        c.right_start = j.at("right").get<int>() - 1;
        c.window = j.at("w").get<int>();
        if (!c.fits(n)) throw ValidationError("window claim does not fit a dataset of size " +
                                              std::to_string(n));
        return c;
    }
    if (type == "linear") {
        LinearClaim c;
        c.weights = j.at("weights").get<std::vector<double>>();
        if (j.contains("offset")) c.offset = j.at("offset").get<double>();
        if (static_cast<int>(c.weights.size()) != n)
            throw ValidationError("linear claim has " + std::to_string(c.weights.size()) +
                                  " weights for a dataset of size " + std::to_string(n));
        return c;
    }
    if (type == "threshold") {
        ThresholdClaim c;
        for (int id : j.at("ids").get<std::vector<int>>()) {
            if (id < 1 || id > n)
                throw ValidationError("threshold claim member " + std::to_string(id) +
                                      " out of range 1.." + std::to_string(n));
            c.member_indices.push_back(id - 1);
        }
        c.threshold = j.at("gamma").get<double>();
        if (j.contains("direction")) c.below = j.at("direction").get<std::string>() != "above";
        return c;
    }
    throw ValidationError("unknown claim type '" + type + "'");
}

inline double claim_end_position(const Claim& c) {
    if (auto* w = std::get_if<WindowAggregateClaim>(&c)) return w->end_index();
    auto s = claim_support(c);
    return s.empty() ? 0 : s.back();
}

inline ClaimsFile read_claims_json(std::istream& in, int n) {
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("claims file is not valid JSON: ") + e.what());
    }
    ClaimsFile out;
    try {
        out.system.original = parse_claim_json(j.at("original"), n);
        const auto& perts = j.at("perturbations");
        if (perts.is_array()) {
            for (const auto& p : perts) out.system.perturbations.push_back(parse_claim_json(p, n));
        } else if (perts.is_object() && perts.at("mode") == "window-shift") {
            auto* w = std::get_if<WindowAggregateClaim>(&out.system.original);
            if (!w) throw ValidationError("window-shift perturbations need a window original claim");
            int count = perts.at("count").get<int>();
            bool include = perts.value("include_original", false);
            for (auto& c : window_perturbations(*w, n, count, include))
                out.system.perturbations.push_back(c);
        } else {
            throw ValidationError("perturbations must be a list or a window-shift generator");
        }
        const auto& sens = j.at("sensibility");
        std::string mode = sens.at("mode").get<std::string>();
        if (mode == "exp") {
            double rate = sens.value("rate", 1.5);
            double origin = claim_end_position(out.system.original);
            std::vector<double> distances;
            for (const auto& c : out.system.perturbations)
                distances.push_back(std::abs(claim_end_position(c) - origin));
            out.system.sensibilities = sensibility_exp_decay(distances, rate);
        } else if (mode == "explicit") {
            out.system.sensibilities = sens.at("values").get<std::vector<double>>();
            double sum = 0;
            for (double s : out.system.sensibilities) sum += s;
            if (std::abs(sum - 1.0) > 1e-12) {
                out.warnings.push_back("sensibilities summed to " + std::to_string(sum) +
                                       "; normalized");
                for (double& s : out.system.sensibilities) s /= sum;
            }
        } else {
            throw ValidationError("unknown sensibility mode '" + mode + "'");
        }
        if (j.contains("delta") && j.at("delta") != "subtract")
            throw ValidationError("only the subtractive delta convention is supported");
        if (j.contains("tau")) {
            out.tau = j.at("tau").get<double>();
            out.tau_given = true;
        }
        if (j.contains("threshold")) {
            double gamma = j.at("threshold").get<double>();
            auto retarget = [gamma](Claim& c) {
                if (auto* t = std::get_if<ThresholdClaim>(&c)) t->threshold = gamma;
            };
            retarget(out.system.original);
            for (auto& c : out.system.perturbations) retarget(c);
        }
        validate_claim_system(out.system);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("claims file: ") + e.what());
    }
    return out;
}

inline ClaimsFile read_claims_json(const std::string& path, int n) {
    std::ifstream f(path);
    if (!f) throw ValidationError("cannot open claims file '" + path + "'");
    return read_claims_json(f, n);
}

} // namespace uclean

#include "qve/model_io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "qve/ensembles.hpp"

namespace qve {

namespace {

Eigen::VectorXd to_vector(const nlohmann::json& j) {
    Eigen::VectorXd v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) v[i] = j[i].get<double>();
    return v;
}

QveModel from_kernel_shorthand(const nlohmann::json& j) {
    const nlohmann::json& k = j.at("kernel");
    const std::string type = k.at("type").get<std::string>();
    const Eigen::Index n = j.at("n").get<Eigen::Index>();
    if (type == "constant") {
        const double value = k.value("value", 1.0);
        Eigen::VectorXd a = j.contains("a") ? to_vector(j.at("a"))
                                            : Eigen::VectorXd::Zero(n);
        return build_model(Eigen::VectorXd::Constant(n, 1.0 / double(n)), a,
                           Eigen::MatrixXd::Constant(n, n, value));
    }
    if (type == "block") {
        BlockParams params;
        params.alpha = k.at("alpha").get<double>();
        params.beta = k.at("beta").get<double>();
        params.gamma = k.at("gamma").get<double>();
        params.delta = k.at("delta").get<double>();
        return block_model(params, n);
    }
    if (type == "deformed") {
        const double lambda = k.at("lambda").get<double>();
        return deformed_wigner_model(lambda, to_vector(j.at("a")), n);
    }
    if (type == "translation_invariant") {
        std::map<std::pair<int, int>, double> cov;
        for (const auto& entry : k.at("cov"))
            cov[{entry.at(0).get<int>(), entry.at(1).get<int>()}] =
                entry.at(2).get<double>();
        return translation_invariant_model(cov, n);
    }
    throw Error("model_from_json: unknown kernel type '" + type + "'");
}

}  // namespace

QveModel model_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    if (j.contains("kernel")) return from_kernel_shorthand(j);
    const Eigen::Index n = j.at("n").get<Eigen::Index>();
    Eigen::VectorXd weights = j.contains("weights")
                                  ? to_vector(j.at("weights"))
                                  : Eigen::VectorXd::Constant(n, 1.0 / double(n));
    Eigen::VectorXd a =
        j.contains("a") ? to_vector(j.at("a")) : Eigen::VectorXd::Zero(n);
    const nlohmann::json& rows = j.at("s");
    if (Eigen::Index(rows.size()) != n)
        throw DimensionMismatch("model_from_json: s has wrong row count");
    Eigen::MatrixXd s(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (Eigen::Index(rows[i].size()) != n)
            throw DimensionMismatch("model_from_json: s has wrong column count");
        for (Eigen::Index c = 0; c < n; ++c) s(i, c) = rows[i][c].get<double>();
    }
    return build_model(weights, a, s);
}

QveModel load_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("load_model_file: cannot open " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return model_from_json(buffer.str());
}

std::string model_to_json(const QveModel& model) {
    nlohmann::json j;
    j["n"] = model.n;
    j["weights"] = std::vector<double>(model.weights.data(),
                                       model.weights.data() + model.n);
    j["a"] = std::vector<double>(model.a.data(), model.a.data() + model.n);
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < model.n; ++i) {
        const Eigen::VectorXd row = model.s.row(i);
        rows.push_back(std::vector<double>(row.data(), row.data() + model.n));
    }
    j["s"] = rows;
    return j.dump(2);
}

}  // namespace qve

#include "morphprof/model_io.hpp"

#include "morphprof/error.hpp"

#include <fstream>

namespace morphprof {

using nlohmann::json;

namespace {

json vector_json(const Eigen::VectorXd& v) {
    return json(std::vector<double>(v.data(), v.data() + v.size()));
}

template <typename Matrix>
json matrix_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::VectorXd vector_from(const json& j) {
    const auto v = j.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

template <typename Matrix>
Matrix matrix_from(const json& j) {
    const auto rows = j.get<std::vector<std::vector<double>>>();
    const auto cols = rows.empty() ? 0 : rows.front().size();
    Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != cols) throw InputError("ragged matrix in model document");
        for (std::size_t c = 0; c < cols; ++c) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];
    }
    return m;
}

json header(const char* kind) {
    return json{{"schema_version", kModelSchemaVersion}, {"kind", kind}};
}

void check_header(const json& j, const char* kind) {
    if (!j.is_object() || !j.contains("schema_version") || !j.contains("kind")) {
        throw InputError("not a model document");
    }
    if (j.at("schema_version") != kModelSchemaVersion) throw InputError("unsupported model schema version");
    if (j.at("kind") != kind) throw InputError(std::string("expected a ") + kind + " model");
}

template <typename F>
auto guarded(F&& f) {
    try {
        return f();
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed model document: ") + e.what());
    }
}

}  // namespace

json model_to_json(const PcaModel& m) {
    json j = header("pca");
    j["mean"] = vector_json(m.mean);
    j["components"] = matrix_json(m.components);
    j["explained_variance"] = vector_json(m.explained_variance);
    j["explained_variance_ratio"] = vector_json(m.explained_variance_ratio);
    return j;
}

json model_to_json(const KMeansModel& m) {
    json j = header("kmeans");
    j["centroids"] = matrix_json(m.centroids);
    j["inertia"] = m.inertia;
    return j;
}

json model_to_json(const GmmModel& m) {
    json j = header("gmm");
    j["weights"] = vector_json(m.weights);
    j["means"] = json::array();
    j["covariances"] = json::array();
    for (const auto& mu : m.means) j["means"].push_back(vector_json(mu));
    for (const auto& cov : m.covariances) j["covariances"].push_back(matrix_json(cov));
    j["log_likelihood"] = m.log_likelihood;
    return j;
}

PcaModel pca_model_from_json(const json& j) {
    check_header(j, "pca");
    return guarded([&] {
        PcaModel m;
        m.mean = vector_from(j.at("mean"));
        m.components = matrix_from<Eigen::MatrixXd>(j.at("components"));
        m.explained_variance = vector_from(j.at("explained_variance"));
        m.explained_variance_ratio = vector_from(j.at("explained_variance_ratio"));
        if (m.components.cols() != m.mean.size()) throw InputError("PCA model dimensions disagree");
        return m;
    });
}

KMeansModel kmeans_model_from_json(const json& j) {
    check_header(j, "kmeans");
    return guarded([&] {
        KMeansModel m;
        m.centroids = matrix_from<DataMatrix>(j.at("centroids"));
        m.inertia = j.at("inertia").get<double>();
        return m;
    });
}

GmmModel gmm_model_from_json(const json& j) {
    check_header(j, "gmm");
    return guarded([&] {
        GmmModel m;
        m.weights = vector_from(j.at("weights"));
        for (const auto& mu : j.at("means")) m.means.push_back(vector_from(mu));
        for (const auto& cov : j.at("covariances")) m.covariances.push_back(matrix_from<Eigen::MatrixXd>(cov));
        m.log_likelihood = j.at("log_likelihood").get<double>();
        const auto k = static_cast<std::size_t>(m.weights.size());
        if (m.means.size() != k || m.covariances.size() != k) throw InputError("GMM model dimensions disagree");
        return m;
    });
}

void save_json(const json& j, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path);
    out << j.dump(2) << '\n';
    if (!out) throw InputError("cannot write " + path);
}

json load_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw InputError("malformed JSON in " + path + ": " + e.what());
    }
}

}  // namespace morphprof

#include "psmc/datagen.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace psmc {

std::string to_string(ExampleId id) {
  switch (id) {
    case ExampleId::Gaussian: return "gaussian";
    case ExampleId::Logistic: return "logistic";
    case ExampleId::Bernoulli: return "bernoulli";
    case ExampleId::Mixture: return "mixture";
  }
  return "?";
}

ExampleId parse_example(const std::string& text) {
  for (ExampleId id : all_examples()) {
    if (to_string(id) == text) return id;
  }
  throw UnknownExample("unknown example '" + text +
                       "' (expected gaussian, logistic, bernoulli or mixture)");
}

std::vector<ExampleId> all_examples() {
  return {ExampleId::Gaussian, ExampleId::Logistic, ExampleId::Bernoulli, ExampleId::Mixture};
}

std::string describe(ExampleId id) {
  switch (id) {
    case ExampleId::Gaussian:
      return "X ~ N(mu, sigma^2), flat prior on (mu, log sigma); random-walk Metropolis";
    case ExampleId::Logistic:
      return "Bayesian logistic regression, flat prior; random-walk Metropolis, Newton center "
             "refinement; synthetic or CSV data";
    case ExampleId::Bernoulli:
      return "Bernoulli(p) with Beta(0.01, 0.01) prior; exact Beta subposteriors and posterior";
    case ExampleId::Mixture:
      return "regression mixture (1-p) N(alpha x1 + beta x2, sigma2) + p N(0, psi2); "
             "binomial-latent Gibbs sampler";
  }
  return {};
}

std::vector<double> default_params(ExampleId id) {
  switch (id) {
    case ExampleId::Gaussian: return {0.0, 10.0};
    case ExampleId::Logistic: return {0.3, 5.0, -7.0, 2.4, -20.0};
    case ExampleId::Bernoulli: return {0.1};
    case ExampleId::Mixture: return {2.0, 5.0, 1.0, 10.0, 0.05};
  }
  return {};
}

GeneratorSpec default_spec(ExampleId id, Eigen::Index N, Seed seed) {
  return GeneratorSpec{id, default_params(id), N, seed, 1.0};
}

void GeneratorSpec::validate() const {
  if (N < 1) throw PreconditionError("generator: N must be >= 1");
  auto need = [&](std::size_t count) {
    if (params.size() != count) {
      throw PreconditionError("generator: " + to_string(example) + " expects " +
                              std::to_string(count) + " parameters, got " +
                              std::to_string(params.size()));
    }
  };
  switch (example) {
    case ExampleId::Gaussian:
      need(2);
      if (!(params[1] > 0.0)) throw PreconditionError("generator: variance must be positive");
      break;
    case ExampleId::Logistic:
      if (params.empty()) throw PreconditionError("generator: logistic needs coefficients");
      break;
    case ExampleId::Bernoulli:
      need(1);
      if (!(params[0] >= 0.0 && params[0] <= 1.0)) {
        throw PreconditionError("generator: p must lie in [0, 1]");
      }
      break;
    case ExampleId::Mixture:
      need(5);
      if (!(params[2] > 0.0 && params[3] > 0.0 && params[4] >= 0.0 && params[4] <= 1.0)) {
        throw PreconditionError("generator: invalid mixture parameters");
      }
      if (!(covariate_sd > 0.0)) throw PreconditionError("generator: covariate_sd must be > 0");
      break;
  }
}

Dataset generate(const GeneratorSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  Dataset data;
  const Eigen::Index N = spec.N;
  const auto& q = spec.params;

  switch (spec.example) {
    case ExampleId::Gaussian: {
      data.columns = {"x"};
      data.rows.resize(N, 1);
      const double sd = std::sqrt(q[1]);
      for (Eigen::Index i = 0; i < N; ++i) data.rows(i, 0) = q[0] + sd * normal(rng);
      break;
    }
    case ExampleId::Logistic: {
      const auto p = static_cast<Eigen::Index>(q.size());
      data.rows.resize(N, p + 1);
      for (Eigen::Index j = 1; j <= p; ++j) data.columns.push_back("x" + std::to_string(j));
      data.columns.push_back("y");
      for (Eigen::Index i = 0; i < N; ++i) {
        double eta = q[0];
        data.rows(i, 0) = 1.0;
        for (Eigen::Index j = 1; j < p; ++j) {
          const double x = uniform(rng);
          data.rows(i, j) = x;
          eta += q[static_cast<std::size_t>(j)] * x;
        }
        const double prob = 1.0 / (1.0 + std::exp(-eta));
        data.rows(i, p) = uniform(rng) < prob ? 1.0 : 0.0;
      }
      break;
    }
    case ExampleId::Bernoulli: {
      data.columns = {"y"};
      data.rows.resize(N, 1);
      for (Eigen::Index i = 0; i < N; ++i) data.rows(i, 0) = uniform(rng) < q[0] ? 1.0 : 0.0;
      break;
    }
    case ExampleId::Mixture: {
      data.columns = {"x1", "x2", "y"};
      data.rows.resize(N, 3);
      const double sigma = std::sqrt(q[2]);
      const double psi = std::sqrt(q[3]);
      for (Eigen::Index i = 0; i < N; ++i) {
        const double x1 = spec.covariate_sd * normal(rng);
        const double x2 = spec.covariate_sd * normal(rng);
        const bool noise = uniform(rng) < q[4];
        const double eps = normal(rng);
        data.rows(i, 0) = x1;
        data.rows(i, 1) = x2;
        data.rows(i, 2) = noise ? psi * eps : q[0] * x1 + q[1] * x2 + sigma * eps;
      }
      break;
    }
  }
  return data;
}

void write_dataset_csv(const Dataset& data, const std::filesystem::path& path) {
  data.validate();
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out.precision(17);
  for (std::size_t c = 0; c < data.columns.size(); ++c) {
    out << (c ? "," : "") << data.columns[c];
  }
  out << '\n';
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    for (Eigen::Index c = 0; c < data.rows.cols(); ++c) {
      out << (c ? "," : "") << data.rows(i, c);
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

Dataset read_dataset_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  Dataset data;
  std::string line;
  if (!std::getline(in, line)) throw ParseError("missing header", 1);
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) data.columns.push_back(cell);
  }
  const auto width = static_cast<Eigen::Index>(data.columns.size());
  std::vector<double> values;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    Eigen::Index count = 0;
    while (std::getline(ss, cell, ',')) {
      try {
        values.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ParseError("non-numeric cell '" + cell + "'", lineno);
      }
      ++count;
    }
    if (count != width) throw ParseError("expected " + std::to_string(width) + " cells", lineno);
  }
  const auto n = static_cast<Eigen::Index>(values.size()) / std::max<Eigen::Index>(width, 1);
  data.rows = Eigen::Map<RowMatrix>(values.data(), n, width);
  data.validate();
  return data;
}

}  // namespace psmc

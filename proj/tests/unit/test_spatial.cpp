#include <gtest/gtest.h>

#include <cmath>

#include "share/spatial/spatial.hpp"
#include "test_util.hpp"

using namespace share;
using share::testing::compare_gradients;
using share::testing::make_csr;
using share::testing::random_tensor;
using share::testing::weighted_sum;

namespace {

using Matrix = std::vector<std::vector<double>>;

Matrix as_matrix(const Tensor& t) {
  Matrix m(t.rows(), std::vector<double>(t.cols()));
  for (std::size_t r = 0; r < t.rows(); ++r) {
    for (std::size_t c = 0; c < t.cols(); ++c) m[r][c] = t.at(r, c);
  }
  return m;
}

Matrix naive_matmul(const Matrix& a, const Matrix& b) {
  Matrix out(a.size(), std::vector<double>(b[0].size(), 0.0));
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t k = 0; k < b.size(); ++k) {
      for (std::size_t j = 0; j < b[0].size(); ++j) out[i][j] += a[i][k] * b[k][j];
    }
  }
  return out;
}

double leaky(double x, double slope) { return x > 0 ? x : slope * x; }

// Attention weights along the CSR pattern, evaluated with plain loops.
std::vector<double> naive_attention(const Matrix& x, const Matrix& wa, const Csr& g) {
  const Matrix q = naive_matmul(x, wa);
  std::vector<double> out;
  for (std::size_t i = 0; i < g.rows(); ++i) {
    std::vector<double> logits;
    for (std::size_t e = g.row_begin(i); e < g.row_end(i); ++e) {
      double dot = 0.0;
      for (std::size_t c = 0; c < q[i].size(); ++c) dot += q[i][c] * q[g.columns[e]][c];
      logits.push_back(std::exp(dot));
    }
    double total = 0.0;
    for (double l : logits) total += l;
    for (double l : logits) out.push_back(l / total);
  }
  return out;
}

std::vector<std::vector<bool>> dense_adjacency(const Csr& g) {
  std::vector<std::vector<bool>> a(g.rows(), std::vector<bool>(g.num_cols, false));
  for (std::size_t i = 0; i < g.rows(); ++i) {
    for (std::size_t e = g.row_begin(i); e < g.row_end(i); ++e) a[i][g.columns[e]] = true;
  }
  return a;
}

std::shared_ptr<const Csr> random_symmetric_graph(SplitMix64& rng, std::size_t n, double p) {
  std::vector<std::vector<bool>> a(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i) {
    a[i][i] = true;
    for (std::size_t j = i + 1; j < n; ++j) a[i][j] = a[j][i] = rng.uniform() < p;
  }
  std::vector<std::vector<std::size_t>> lists(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (a[i][j]) lists[i].push_back(j);
    }
  }
  return make_csr(lists, n);
}

Tensor random_stochastic(SplitMix64& rng, std::size_t n, std::size_t k) {
  Tensor s(Shape{n, k});
  for (std::size_t i = 0; i < n; ++i) {
    double total = 0.0;
    for (std::size_t c = 0; c < k; ++c) total += s.at(i, c) = rng.uniform(0.01, 1.0);
    for (std::size_t c = 0; c < k; ++c) s.at(i, c) /= total;
  }
  return s;
}

}  // namespace

TEST(Attention, IdenticalFeaturesGiveUniformWeights) {
  Tape tape;
  const auto g = make_csr({{0, 1, 2}, {1, 2}, {0, 2}}, 3);
  const Var x = tape.constant(Tensor(Shape{3, 2}, 0.7));
  SplitMix64 rng(1);
  const Var w = tape.constant(random_tensor(rng, {2, 4}));
  const Var a = attention_proximity(x, w, g);
  EXPECT_NEAR(a.value()[0], 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(a.value()[3], 0.5, 1e-15);
  EXPECT_NEAR(a.value()[6], 0.5, 1e-15);
}

TEST(Attention, SingletonNeighborhood) {
  Tape tape;
  const auto g = make_csr({{1}, {1}}, 2);
  SplitMix64 rng(2);
  const Var a = attention_proximity(tape.constant(random_tensor(rng, {2, 3})),
                                    tape.constant(random_tensor(rng, {3, 2})), g);
  EXPECT_DOUBLE_EQ(a.value()[0], 1.0);
  EXPECT_DOUBLE_EQ(a.value()[1], 1.0);
}

TEST(Attention, HandEvaluatedThreeLots) {
  // W_a = I, features q_0 = (1, 0), q_1 = (0, 1), q_2 = (1, 1).
  // Row 0 over {0, 2}: logits 1, 1 -> 1/2, 1/2.
  // Row 2 over {0, 1, 2}: logits 1, 1, 2 -> e/(2e + e^2) twice and e^2/(2e + e^2).
  Tape tape;
  const auto g = make_csr({{0, 2}, {1}, {0, 1, 2}}, 3);
  const Var x = tape.constant(Tensor::matrix(3, 2, {1, 0, 0, 1, 1, 1}));
  const Var w = tape.constant(Tensor::matrix(2, 2, {1, 0, 0, 1}));
  const Var a = attention_proximity(x, w, g);
  const double e = std::exp(1.0), e2 = std::exp(2.0);
  const std::vector<double> expected{0.5, 0.5, 1.0, e / (2 * e + e2), e / (2 * e + e2), e2 / (2 * e + e2)};
  for (std::size_t i = 0; i < expected.size(); ++i) EXPECT_NEAR(a.value()[i], expected[i], 1e-15);
}

TEST(Attention, RowsSumToOne) {
  SplitMix64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    Tape tape;
    const auto g = random_symmetric_graph(rng, 7, 0.4);
    const Var a = attention_proximity(tape.constant(random_tensor(rng, {7, 3}, -2, 2)),
                                      tape.constant(random_tensor(rng, {3, 4}, -2, 2)), g);
    for (std::size_t i = 0; i < 7; ++i) {
      double total = 0.0;
      for (std::size_t e = g->row_begin(i); e < g->row_end(i); ++e) total += a.value()[e];
      EXPECT_NEAR(total, 1.0, 1e-9);
    }
  }
}

TEST(CxtConv, SingleNeighborIdentityTransform) {
  Tape tape;
  const auto g = make_csr({{1}, {1}}, 2);
  const Var x = tape.constant(Tensor::matrix(2, 2, {0.3, 0.1, 2.0, 5.0}));
  const CxtConvWeights layer{tape.constant(Tensor::matrix(2, 2, {1, 0, 0, 1})),
                             tape.constant(Tensor::matrix(2, 2, {1, 0, 0, 1}))};
  const Var y = cxtconv_layer(layer, x, g);
  EXPECT_EQ(share::testing::to_vector(y.value().values()), (std::vector<double>{2.0, 5.0, 2.0, 5.0}));
}

TEST(CxtConv, ZeroFeaturesGiveZeroOutput) {
  Tape tape;
  SplitMix64 rng(4);
  const auto g = random_symmetric_graph(rng, 5, 0.5);
  const CxtConvWeights layer{tape.constant(random_tensor(rng, {3, 4})), tape.constant(random_tensor(rng, {3, 4}))};
  const Var y = cxtconv_layer(layer, tape.constant(Tensor(Shape{5, 3})), g);
  for (double v : y.value().values()) EXPECT_EQ(v, 0.0);
}

TEST(CxtConv, PathGraphMatchesDirectEvaluation) {
  Tape tape;
  const auto g = make_csr({{0, 1}, {0, 1, 2}, {1, 2, 3}, {2, 3}}, 4);
  const Tensor xt = Tensor::matrix(4, 2, {0.5, -1.0, 1.0, 0.2, -0.3, 0.8, 0.0, 1.5});
  const Tensor wa = Tensor::matrix(2, 2, {0.4, -0.2, 0.1, 0.3});
  const Tensor wc = Tensor::matrix(2, 3, {1.0, -0.5, 0.2, 0.3, 0.7, -1.1});
  const CxtConvWeights layer{tape.constant(wa), tape.constant(wc)};
  const Var y = cxtconv_layer(layer, tape.constant(xt), g, 0.2);

  const Matrix x = as_matrix(xt);
  const auto alpha = naive_attention(x, as_matrix(wa), *g);
  const Matrix v = naive_matmul(x, as_matrix(wc));
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t c = 0; c < 3; ++c) {
      double acc = 0.0;
      for (std::size_t e = g->row_begin(i); e < g->row_end(i); ++e) acc += alpha[e] * v[g->columns[e]][c];
      EXPECT_NEAR(y.value().at(i, c), leaky(acc, 0.2), 1e-14);
    }
  }
}

TEST(CxtConv, ShapeMismatchThrows) {
  Tape tape;
  const auto g = make_csr({{0}, {1}}, 2);
  const CxtConvWeights layer{tape.constant(Tensor(Shape{3, 2})), tape.constant(Tensor(Shape{3, 2}))};
  EXPECT_THROW(cxtconv_layer(layer, tape.constant(Tensor(Shape{2, 4})), g), ShapeError);
}

TEST(CxtConv, PermutationEquivariant) {
  SplitMix64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 6;
    const auto g = random_symmetric_graph(rng, n, 0.5);
    const auto adj = dense_adjacency(*g);
    std::vector<std::size_t> perm{3, 0, 5, 1, 4, 2};
    std::vector<std::vector<std::size_t>> lists(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (adj[perm[i]][perm[j]]) lists[i].push_back(j);
      }
    }
    const auto gp = make_csr(lists, n);
    const Tensor x = random_tensor(rng, {n, 3});
    Tensor xp(Shape{n, 3});
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < 3; ++c) xp.at(i, c) = x.at(perm[i], c);
    }
    const Tensor wa = random_tensor(rng, {3, 4}), wc = random_tensor(rng, {3, 4});
    Tape tape;
    const CxtConvWeights layer{tape.constant(wa), tape.constant(wc)};
    const Var y = cxtconv_layer(layer, tape.constant(x), g);
    const Var yp = cxtconv_layer(layer, tape.constant(xp), gp);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < 4; ++c) EXPECT_NEAR(yp.value().at(i, c), y.value().at(perm[i], c), 1e-13);
    }
  }
}

TEST(SoftAssignment, ZeroWeightsGiveUniformRows) {
  Tape tape;
  SplitMix64 rng(6);
  const Var s = soft_assignment(tape.constant(Tensor(Shape{3, 4})), tape.constant(random_tensor(rng, {5, 3})));
  for (double v : s.value().values()) EXPECT_NEAR(v, 0.25, 1e-15);
}

TEST(SoftAssignment, TwoLotsTwoLatents) {
  Tape tape;
  const Var s = soft_assignment(tape.constant(Tensor::matrix(2, 2, {1.0, 0.0, 0.0, 2.0})),
                                tape.constant(Tensor::matrix(2, 2, {1.0, 0.0, 0.5, 0.5})));
  // Logits: row 0 = (1, 0); row 1 = (0.5, 1).
  EXPECT_NEAR(s.value().at(0, 0), std::exp(1.0) / (std::exp(1.0) + 1.0), 1e-15);
  EXPECT_NEAR(s.value().at(1, 1), std::exp(1.0) / (std::exp(0.5) + std::exp(1.0)), 1e-15);
}

TEST(SoftAssignment, RowsArePositiveDistributions) {
  SplitMix64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    Tape tape;
    const Var s = soft_assignment(tape.constant(random_tensor(rng, {4, 3}, -3, 3)),
                                  tape.constant(random_tensor(rng, {6, 4}, -3, 3)));
    for (std::size_t i = 0; i < 6; ++i) {
      double total = 0.0;
      for (std::size_t c = 0; c < 3; ++c) {
        EXPECT_GT(s.value().at(i, c), 0.0);
        total += s.value().at(i, c);
      }
      EXPECT_NEAR(total, 1.0, 1e-9);
    }
  }
}

TEST(LatentPool, SingleLatentNodeCollapses) {
  Tape tape;
  SplitMix64 rng(8);
  const auto g = random_symmetric_graph(rng, 5, 0.5);
  const Tensor x = random_tensor(rng, {5, 2});
  const LatentPool pool = latent_pool(tape.constant(Tensor(Shape{5, 1}, 1.0)), tape.constant(x), g);
  for (std::size_t c = 0; c < 2; ++c) {
    double total = 0.0;
    for (std::size_t i = 0; i < 5; ++i) total += x.at(i, c);
    EXPECT_NEAR(pool.features.value().at(0, c), total, 1e-14);
  }
  EXPECT_DOUBLE_EQ(pool.proximity.value()[0], static_cast<double>(g->nnz()));
}

TEST(LatentPool, HardAssignmentCountsEdgesBetweenClusters) {
  Tape tape;
  const auto g = make_csr({{0, 1}, {0, 1, 2}, {1, 2, 3}, {2, 3}}, 4);
  const Tensor s = Tensor::matrix(4, 2, {1, 0, 1, 0, 0, 1, 0, 1});
  const Tensor x = Tensor::matrix(4, 1, {1, 2, 3, 4});
  const LatentPool pool = latent_pool(tape.constant(s), tape.constant(x), g);
  EXPECT_DOUBLE_EQ(pool.features.value()[0], 3.0);
  EXPECT_DOUBLE_EQ(pool.features.value()[1], 7.0);
  EXPECT_EQ(share::testing::to_vector(pool.proximity.value().values()), (std::vector<double>{4, 1, 1, 4}));
}

TEST(LatentPool, MatchesBruteForceTripleSum) {
  SplitMix64 rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    const auto n = static_cast<std::size_t>(rng.integer(1, 8));
    const auto k = static_cast<std::size_t>(rng.integer(1, 4));
    const auto g = random_symmetric_graph(rng, n, 0.4);
    const auto a = dense_adjacency(*g);
    const Tensor s = random_stochastic(rng, n, k);
    Tape tape;
    const LatentPool pool = latent_pool(tape.constant(s), tape.constant(random_tensor(rng, {n, 2})), g);
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        double expected = 0.0;
        for (std::size_t m = 0; m < n; ++m) {
          for (std::size_t q = 0; q < n; ++q) expected += s.at(m, i) * (a[m][q] ? 1.0 : 0.0) * s.at(q, j);
        }
        EXPECT_NEAR(pool.proximity.value().at(i, j), expected, 1e-12);
      }
    }
  }
}

TEST(SCConv, SingleLatentScalesFeatures) {
  Tape tape;
  const auto g = make_csr({{0, 1}, {0, 1}, {2}}, 3);
  const Tensor s = Tensor::matrix(3, 1, {1, 1, 1});
  const Tensor x = Tensor::matrix(3, 2, {0.1, 0.2, 0.3, 0.4, 0.5, 0.6});
  const LatentPool pool = latent_pool(tape.constant(s), tape.constant(x), g);
  const Var out = scconv_unpool(tape.constant(Tensor::matrix(2, 2, {1, 0, 0, 1})), pool, tape.constant(s));
  const double c = 5.0;  // edges in the graph
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_NEAR(out.value().at(i, 0), c * 0.9, 1e-14);
    EXPECT_NEAR(out.value().at(i, 1), c * 1.2, 1e-14);
  }
}

TEST(SCConv, SingleLatentMeanScalingAveragesFeatures) {
  Tape tape;
  const auto g = make_csr({{0, 1}, {0, 1}, {2}}, 3);
  const Tensor s = Tensor::matrix(3, 1, {1, 1, 1});
  const Tensor x = Tensor::matrix(3, 2, {0.1, 0.2, 0.3, 0.4, 0.5, 0.6});
  const LatentPool pool = latent_pool(tape.constant(s), tape.constant(x), g);
  const Var out = scconv_unpool(tape.constant(Tensor::matrix(2, 2, {1, 0, 0, 1})), pool, tape.constant(s), 0.2,
                                LatentScaling::kMean);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_NEAR(out.value().at(i, 0), 0.3, 1e-14);
    EXPECT_NEAR(out.value().at(i, 1), 0.4, 1e-14);
  }
}

TEST(SCConv, ZeroLatentFeaturesGiveZero) {
  Tape tape;
  SplitMix64 rng(10);
  const auto g = random_symmetric_graph(rng, 4, 0.5);
  const Var s = tape.constant(random_stochastic(rng, 4, 2));
  const LatentPool pool = latent_pool(s, tape.constant(Tensor(Shape{4, 3})), g);
  const Var out = scconv_unpool(tape.constant(random_tensor(rng, {3, 3})), pool, s);
  for (double v : out.value().values()) EXPECT_EQ(v, 0.0);
}

TEST(SCConv, SixLotsThreeLatentsMatchesDirectPipeline) {
  SplitMix64 rng(11);
  const auto g = random_symmetric_graph(rng, 6, 0.5);
  const auto a = dense_adjacency(*g);
  const Tensor xt = random_tensor(rng, {6, 2});
  const Tensor ws = random_tensor(rng, {2, 3});
  const Tensor wl = random_tensor(rng, {2, 2});
  Tape tape;
  const Var s = soft_assignment(tape.constant(ws), tape.constant(xt));
  const LatentPool pool = latent_pool(s, tape.constant(xt), g);
  const Var out = scconv_unpool(tape.constant(wl), pool, s, 0.2);
  const Var out_mean = scconv_unpool(tape.constant(wl), pool, s, 0.2, LatentScaling::kMean);

  const Matrix x = as_matrix(xt);
  Matrix logits = naive_matmul(x, as_matrix(ws));
  Matrix sm = logits;
  for (auto& row : sm) {
    double total = 0.0;
    for (double& v : row) total += v = std::exp(v);
    for (double& v : row) v /= total;
  }
  Matrix xs(3, std::vector<double>(2, 0.0)), as(3, std::vector<double>(3, 0.0));
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t m = 0; m < 6; ++m) {
      for (std::size_t f = 0; f < 2; ++f) xs[c][f] += sm[m][c] * x[m][f];
    }
    for (std::size_t d = 0; d < 3; ++d) {
      for (std::size_t m = 0; m < 6; ++m) {
        for (std::size_t q = 0; q < 6; ++q) as[c][d] += a[m][q] ? sm[m][c] * sm[q][d] : 0.0;
      }
    }
  }
  Matrix hidden = naive_matmul(naive_matmul(as, xs), as_matrix(wl));
  for (auto& row : hidden) {
    for (double& v : row) v = leaky(v, 0.2);
  }
  const Matrix expected = naive_matmul(sm, hidden);
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t f = 0; f < 2; ++f) EXPECT_NEAR(out.value().at(i, f), expected[i][f], 1e-13);
  }

  // Mean scaling: divide X^s rows by assignment mass and alpha^s rows by their sums.
  for (std::size_t c = 0; c < 3; ++c) {
    double mass = 0.0, degree = 0.0;
    for (std::size_t m = 0; m < 6; ++m) mass += sm[m][c];
    for (std::size_t d = 0; d < 3; ++d) degree += as[c][d];
    for (double& v : xs[c]) v /= mass;
    for (double& v : as[c]) v /= degree;
  }
  Matrix hidden_mean = naive_matmul(naive_matmul(as, xs), as_matrix(wl));
  for (auto& row : hidden_mean) {
    for (double& v : row) v = leaky(v, 0.2);
  }
  const Matrix expected_mean = naive_matmul(sm, hidden_mean);
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t f = 0; f < 2; ++f) EXPECT_NEAR(out_mean.value().at(i, f), expected_mean[i][f], 1e-13);
  }
}

TEST(SpatialGradients, MatchFiniteDifferences) {
  SplitMix64 rng(12);
  const auto g = random_symmetric_graph(rng, 5, 0.5);
  const std::vector<Tensor> inputs{random_tensor(rng, {5, 3}), random_tensor(rng, {3, 4}),
                                   random_tensor(rng, {3, 4}), random_tensor(rng, {4, 2}),
                                   random_tensor(rng, {4, 4})};
  const auto build = [g](Tape& t, const std::vector<Var>& v) {
    const Var xc = cxtconv_layer({v[1], v[2]}, v[0], g);
    const Var s = soft_assignment(v[3], xc);
    const LatentPool pool = latent_pool(s, xc, g);
    return weighted_sum(t, scconv_unpool(v[4], pool, s));
  };
  EXPECT_LT(compare_gradients(build, inputs, 1e-5).max_relative, 1e-4);
  const auto build_mean = [g](Tape& t, const std::vector<Var>& v) {
    const Var xc = cxtconv_layer({v[1], v[2]}, v[0], g);
    const Var s = soft_assignment(v[3], xc);
    const LatentPool pool = latent_pool(s, xc, g);
    return weighted_sum(t, scconv_unpool(v[4], pool, s, 0.2, LatentScaling::kMean));
  };
  EXPECT_LT(compare_gradients(build_mean, inputs, 1e-5).max_relative, 1e-4);
}

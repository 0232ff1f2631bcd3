#include <gtest/gtest.h>

#include "mssit/rng.hpp"
#include "mssit/tensor/ops.hpp"
#include "support/gradcheck.hpp"

using namespace mssit;
using mssit::testing::expect_gradients_match;

namespace {

Tensor<double> random_tensor(Shape shape, Rng& rng, double scale = 1.0) {
  Tensor<double> t = Tensor<double>::zeros(std::move(shape));
  for (auto& v : t.values()) v = rng.normal() * scale;
  return t;
}

// Sum with fixed random weights turns any tensor into a scalar loss whose
// gradient exercises all coordinates differently.
Tensor<double> weighted_sum(Tape<double>* tape, const Tensor<double>& x, Rng rng) {
  Tensor<double> w = Tensor<double>::zeros(x.shape());
  for (auto& v : w.values()) v = rng.normal();
  Tensor<double> flat_x = reshape(tape, x, {1, x.numel()});
  Tensor<double> flat_w = reshape<double>(nullptr, w, {x.numel(), 1});
  return reshape(tape, matmul(tape, flat_x, flat_w), {1});
}

}  // namespace

TEST(Autodiff, SumGradientIsOnes) {
  Tensor<double> x = Tensor<double>::from({2, 3}, {1, 2, 3, 4, 5, 6});
  x.set_requires_grad();
  Tape<double> tape;
  Tensor<double> loss = sum_all(&tape, x);
  tape.backward(loss);
  for (double g : x.grad()) EXPECT_DOUBLE_EQ(g, 1.0);
}

TEST(Autodiff, ClosedFormScalarMse) {
  // loss = (w*x - y)^2 -> dL/dw = 2(wx - y)x
  const double xv = 1.7, yv = 0.4, wv = -0.6;
  Tensor<double> w = Tensor<double>::scalar(wv);
  w.set_requires_grad();
  Tape<double> tape;
  Tensor<double> x = Tensor<double>::from({1, 1}, {xv});
  Tensor<double> pred = matmul(&tape, reshape<double>(&tape, w, {1, 1}), x);
  Tensor<double> diff = add(&tape, pred, Tensor<double>::from({1, 1}, {-yv}));
  // square via elementwise product with itself: use matmul on 1x1
  Tensor<double> loss = reshape(&tape, matmul(&tape, diff, diff), {1});
  tape.backward(loss);
  EXPECT_NEAR(w.grad()[0], 2.0 * (wv * xv - yv) * xv, 1e-12);
}

TEST(Autodiff, MultipleUsesAccumulate) {
  Tensor<double> x = Tensor<double>::from({3}, {1, 2, 3});
  x.set_requires_grad();
  Tape<double> tape;
  Tensor<double> y = add(&tape, x, x);
  Tensor<double> loss = sum_all(&tape, y);
  tape.backward(loss);
  for (double g : x.grad()) EXPECT_DOUBLE_EQ(g, 2.0);
}

TEST(Autodiff, BackwardOfSumEqualsSumOfBackwards) {
  Rng rng(11);
  Tensor<double> x = random_tensor({4, 4}, rng);

  auto run_combined = [&] {
    Tensor<double> p = x.clone();
    p.set_requires_grad();
    p.zero_grad();
    Tape<double> tape;
    Tensor<double> l1 = weighted_sum(&tape, gelu(&tape, p), Rng(1));
    Tensor<double> l2 = weighted_sum(&tape, softmax_last(&tape, p), Rng(2));
    tape.backward(add(&tape, l1, l2));
    return p.grad();
  };
  auto run_single = [&](int which) {
    Tensor<double> p = x.clone();
    p.set_requires_grad();
    p.zero_grad();
    Tape<double> tape;
    Tensor<double> l = which == 1 ? weighted_sum(&tape, gelu(&tape, p), Rng(1))
                                  : weighted_sum(&tape, softmax_last(&tape, p), Rng(2));
    tape.backward(l);
    return p.grad();
  };

  const auto combined = run_combined();
  const auto g1 = run_single(1);
  const auto g2 = run_single(2);
  for (std::size_t i = 0; i < combined.size(); ++i)
    EXPECT_NEAR(combined[i], g1[i] + g2[i], 1e-12);
}

TEST(Autodiff, NonScalarLossRejected) {
  Tensor<double> x = Tensor<double>::from({2}, {1, 2});
  x.set_requires_grad();
  Tape<double> tape;
  Tensor<double> y = add(&tape, x, x);
  EXPECT_THROW(tape.backward(y), std::invalid_argument);
}

TEST(Autodiff, EmptyTapeRejected) {
  Tape<double> tape;
  EXPECT_THROW(tape.backward(Tensor<double>::scalar(1.0)), std::invalid_argument);
}

// --- finite-difference checks, one per differentiable op -------------------

TEST(GradCheck, Matmul) {
  Rng rng(21);
  Tensor<double> a = random_tensor({3, 4}, rng);
  Tensor<double> b = random_tensor({4, 5}, rng);
  expect_gradients_match({a, b}, [&](Tape<double>* t) {
    return weighted_sum(t, matmul(t, a, b), Rng(3));
  });
}

TEST(GradCheck, BatchedMatmul) {
  Rng rng(22);
  Tensor<double> a = random_tensor({2, 3, 4}, rng);
  Tensor<double> b = random_tensor({2, 4, 3}, rng);
  expect_gradients_match({a, b}, [&](Tape<double>* t) {
    return weighted_sum(t, matmul(t, a, b), Rng(4));
  });
}

TEST(GradCheck, AddAndScale) {
  Rng rng(23);
  Tensor<double> a = random_tensor({4, 3}, rng);
  Tensor<double> b = random_tensor({4, 3}, rng);
  expect_gradients_match({a, b}, [&](Tape<double>* t) {
    return weighted_sum(t, scale(t, add(t, a, b), 1.7), Rng(5));
  });
}

TEST(GradCheck, AddRowvec) {
  Rng rng(24);
  Tensor<double> a = random_tensor({5, 4}, rng);
  Tensor<double> bias = random_tensor({4}, rng);
  expect_gradients_match({a, bias}, [&](Tape<double>* t) {
    return weighted_sum(t, add_rowvec(t, a, bias), Rng(6));
  });
}

TEST(GradCheck, TransposeLast2) {
  Rng rng(25);
  Tensor<double> a = random_tensor({2, 3, 4}, rng);
  expect_gradients_match({a}, [&](Tape<double>* t) {
    return weighted_sum(t, transpose_last2(t, a), Rng(7));
  });
}

TEST(GradCheck, ReshapeGatherSliceConcat) {
  Rng rng(26);
  Tensor<double> a = random_tensor({6, 4}, rng);
  expect_gradients_match({a}, [&](Tape<double>* t) {
    Tensor<double> r = reshape(t, a, {4, 6});
    Tensor<double> g = gather_rows(t, r, {1, 3, 1, 0});
    auto parts = split_last(t, g, 2);
    Tensor<double> joined = concat_last(t, {parts[1], parts[0]});
    return weighted_sum(t, joined, Rng(8));
  });
}

TEST(GradCheck, SoftmaxLast) {
  Rng rng(27);
  Tensor<double> a = random_tensor({4, 7}, rng);
  expect_gradients_match({a}, [&](Tape<double>* t) {
    return weighted_sum(t, softmax_last(t, a), Rng(9));
  });
}

TEST(GradCheck, LayerNorm) {
  Rng rng(28);
  Tensor<double> x = random_tensor({4, 8}, rng);
  Tensor<double> gamma = random_tensor({8}, rng, 0.5);
  Tensor<double> beta = random_tensor({8}, rng, 0.5);
  for (auto& v : gamma.values()) v += 1.0;
  expect_gradients_match({x, gamma, beta}, [&](Tape<double>* t) {
    return weighted_sum(t, layer_norm(t, x, gamma, beta), Rng(10));
  });
}

TEST(GradCheck, Gelu) {
  Rng rng(29);
  Tensor<double> a = random_tensor({5, 5}, rng);
  expect_gradients_match({a}, [&](Tape<double>* t) {
    return weighted_sum(t, gelu(t, a), Rng(11));
  });
}

TEST(GradCheck, DropoutFixedMask) {
  Rng rng(30);
  Tensor<double> a = random_tensor({6, 6}, rng);
  expect_gradients_match({a}, [&](Tape<double>* t) {
    Rng drop(77);  // same mask on every evaluation
    return weighted_sum(t, dropout(t, a, 0.75, drop), Rng(12));
  });
}

TEST(GradCheck, MeanRowsAndSum) {
  Rng rng(31);
  Tensor<double> a = random_tensor({5, 3}, rng);
  expect_gradients_match({a}, [&](Tape<double>* t) {
    return weighted_sum(t, mean_rows(t, a), Rng(13));
  });
  expect_gradients_match({a}, [&](Tape<double>* t) { return sum_all(t, a); });
}

TEST(GradCheck, SparseRowMix) {
  Rng rng(32);
  auto s = std::make_shared<SparseMix>();
  s->rows = 3;
  s->cols = 4;
  s->offsets = {0, 2, 4, 6};
  s->index = {0, 1, 1, 2, 3, 0};
  s->weight = {0.5, 0.5, 0.3, 0.7, 0.9, 0.1};
  s->finalize();
  Tensor<double> x = random_tensor({4, 3}, rng);
  expect_gradients_match({x}, [&](Tape<double>* t) {
    return weighted_sum(t, sparse_row_mix(t, s, x), Rng(14));
  });
}

TEST(GradCheck, ThreeLayerMlp) {
  Rng rng(33);
  Tensor<double> x = random_tensor({4, 6}, rng);
  Tensor<double> w1 = random_tensor({6, 8}, rng, 0.5);
  Tensor<double> b1 = random_tensor({8}, rng, 0.1);
  Tensor<double> w2 = random_tensor({8, 8}, rng, 0.5);
  Tensor<double> b2 = random_tensor({8}, rng, 0.1);
  Tensor<double> w3 = random_tensor({8, 2}, rng, 0.5);
  Tensor<double> b3 = random_tensor({2}, rng, 0.1);
  expect_gradients_match({x, w1, b1, w2, b2, w3, b3}, [&](Tape<double>* t) {
    Tensor<double> h1 = gelu(t, add_rowvec(t, matmul(t, x, w1), b1));
    Tensor<double> h2 = gelu(t, add_rowvec(t, matmul(t, h1, w2), b2));
    Tensor<double> out = add_rowvec(t, matmul(t, h2, w3), b3);
    return weighted_sum(t, out, Rng(15));
  });
}

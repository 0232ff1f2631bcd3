#include <gtest/gtest.h>

#include "mssit/rng.hpp"
#include "mssit/tensor/ops.hpp"

using namespace mssit;

namespace {

Tensor<double> random_tensor(Shape shape, Rng& rng) {
  Tensor<double> t = Tensor<double>::zeros(std::move(shape));
  for (auto& v : t.values()) v = rng.normal();
  return t;
}

}  // namespace

TEST(TensorOps, MatmulMatchesNaiveLoop) {
  Rng rng(1);
  const Tensor<double> a = random_tensor({2, 3}, rng);
  const Tensor<double> b = random_tensor({3, 4}, rng);
  const Tensor<double> c = matmul<double>(nullptr, a, b);
  ASSERT_EQ(c.shape(), (Shape{2, 4}));
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 4; ++j) {
      double expect = 0.0;
      for (std::size_t k = 0; k < 3; ++k) expect += a.data()[i * 3 + k] * b.data()[k * 4 + j];
      EXPECT_NEAR(c.data()[i * 4 + j], expect, 1e-14);
    }
}

TEST(TensorOps, BatchedMatmul) {
  Rng rng(2);
  const Tensor<double> a = random_tensor({3, 2, 4}, rng);
  const Tensor<double> b = random_tensor({3, 4, 5}, rng);
  const Tensor<double> c = matmul<double>(nullptr, a, b);
  ASSERT_EQ(c.shape(), (Shape{3, 2, 5}));
  for (std::size_t s = 0; s < 3; ++s)
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 5; ++j) {
        double expect = 0.0;
        for (std::size_t k = 0; k < 4; ++k)
          expect += a.data()[s * 8 + i * 4 + k] * b.data()[s * 20 + k * 5 + j];
        EXPECT_NEAR(c.data()[s * 10 + i * 5 + j], expect, 1e-14);
      }
}

TEST(TensorOps, MatmulShapeMismatchRejected) {
  const Tensor<double> a = Tensor<double>::zeros({2, 3});
  const Tensor<double> b = Tensor<double>::zeros({4, 2});
  EXPECT_THROW(matmul<double>(nullptr, a, b), std::invalid_argument);
}

TEST(TensorOps, SoftmaxOfEqualPairIsHalfHalf) {
  const Tensor<double> x = Tensor<double>::from({2}, {0.0, 0.0});
  const Tensor<double> y = softmax_last<double>(nullptr, x);
  EXPECT_DOUBLE_EQ(y.data()[0], 0.5);
  EXPECT_DOUBLE_EQ(y.data()[1], 0.5);
}

TEST(TensorOps, SoftmaxRowsSumToOne) {
  Rng rng(3);
  const Tensor<double> x = random_tensor({7, 9}, rng);
  const Tensor<double> y = softmax_last<double>(nullptr, x);
  for (std::size_t i = 0; i < 7; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < 9; ++j) {
      EXPECT_GT(y.data()[i * 9 + j], 0.0);
      sum += y.data()[i * 9 + j];
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(TensorOps, LayerNormConstantRowGivesZeros) {
  const Tensor<double> x = Tensor<double>::from({1, 4}, {2.5, 2.5, 2.5, 2.5});
  const Tensor<double> gamma = Tensor<double>::from({4}, {1, 1, 1, 1});
  const Tensor<double> beta = Tensor<double>::zeros({4});
  const Tensor<double> y = layer_norm<double>(nullptr, x, gamma, beta);
  for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(y.data()[j], 0.0, 1e-12);
}

TEST(TensorOps, LayerNormNormalisesRows) {
  Rng rng(4);
  const Tensor<double> x = random_tensor({5, 16}, rng);
  const Tensor<double> gamma = Tensor<double>::from({16}, std::vector<double>(16, 1.0));
  const Tensor<double> beta = Tensor<double>::zeros({16});
  const Tensor<double> y = layer_norm<double>(nullptr, x, gamma, beta);
  for (std::size_t i = 0; i < 5; ++i) {
    double mean = 0.0, var = 0.0;
    for (std::size_t j = 0; j < 16; ++j) mean += y.data()[i * 16 + j];
    mean /= 16;
    for (std::size_t j = 0; j < 16; ++j) {
      const double d = y.data()[i * 16 + j] - mean;
      var += d * d;
    }
    var /= 16;
    EXPECT_NEAR(mean, 0.0, 1e-12);
    EXPECT_NEAR(var, 1.0, 1e-4);  // eps shifts the variance slightly below 1
  }
}

TEST(TensorOps, GeluKnownValues) {
  const Tensor<double> x = Tensor<double>::from({3}, {0.0, 1.0, -1.0});
  const Tensor<double> y = gelu<double>(nullptr, x);
  EXPECT_DOUBLE_EQ(y.data()[0], 0.0);
  EXPECT_NEAR(y.data()[1], 0.8413447460685429, 1e-12);   // 1 * Phi(1)
  EXPECT_NEAR(y.data()[2], -0.15865525393145707, 1e-12);  // -1 * Phi(-1)
}

TEST(TensorOps, TransposeReshapeGatherConcatSlice) {
  Rng rng(5);
  const Tensor<double> x = random_tensor({3, 4}, rng);
  const Tensor<double> xt = transpose_last2<double>(nullptr, x);
  ASSERT_EQ(xt.shape(), (Shape{4, 3}));
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      EXPECT_EQ(xt.data()[j * 3 + i], x.data()[i * 4 + j]);

  const Tensor<double> r = reshape<double>(nullptr, x, {2, 6});
  EXPECT_EQ(r.values(), x.values());

  const Tensor<double> g = gather_rows<double>(nullptr, x, {2, 0, 2});
  ASSERT_EQ(g.shape(), (Shape{3, 4}));
  for (std::size_t j = 0; j < 4; ++j) {
    EXPECT_EQ(g.data()[0 * 4 + j], x.data()[2 * 4 + j]);
    EXPECT_EQ(g.data()[1 * 4 + j], x.data()[0 * 4 + j]);
    EXPECT_EQ(g.data()[2 * 4 + j], x.data()[2 * 4 + j]);
  }

  const auto parts = split_last<double>(nullptr, x, 2);
  ASSERT_EQ(parts.size(), 2u);
  const Tensor<double> joined = concat_last<double>(nullptr, parts);
  EXPECT_EQ(joined.values(), x.values());

  const Tensor<double> s = slice_cols<double>(nullptr, x, 1, 2);
  ASSERT_EQ(s.shape(), (Shape{3, 2}));
  EXPECT_EQ(s.data()[0], x.data()[1]);
}

TEST(TensorOps, MeanRowsAndSum) {
  const Tensor<double> x = Tensor<double>::from({2, 3}, {1, 2, 3, 5, 6, 7});
  const Tensor<double> m = mean_rows<double>(nullptr, x);
  ASSERT_EQ(m.shape(), (Shape{3}));
  EXPECT_DOUBLE_EQ(m.data()[0], 3.0);
  EXPECT_DOUBLE_EQ(m.data()[1], 4.0);
  EXPECT_DOUBLE_EQ(m.data()[2], 5.0);
  EXPECT_DOUBLE_EQ(sum_all<double>(nullptr, x).item(), 24.0);
}

TEST(TensorOps, AddRowvecBroadcastsBias) {
  const Tensor<double> x = Tensor<double>::from({2, 2}, {1, 2, 3, 4});
  const Tensor<double> b = Tensor<double>::from({2}, {10, 20});
  const Tensor<double> y = add_rowvec<double>(nullptr, x, b);
  EXPECT_DOUBLE_EQ(y.data()[0], 11.0);
  EXPECT_DOUBLE_EQ(y.data()[1], 22.0);
  EXPECT_DOUBLE_EQ(y.data()[2], 13.0);
  EXPECT_DOUBLE_EQ(y.data()[3], 24.0);
}

TEST(TensorOps, DropoutKeepOneIsIdentity) {
  Rng rng(6);
  const Tensor<double> x = random_tensor({4, 4}, rng);
  Rng drop_rng(0);
  const Tensor<double> y = dropout<double>(nullptr, x, 1.0, drop_rng);
  EXPECT_EQ(y.id(), x.id());  // exact identity, same payload
}

TEST(TensorOps, DropoutMasksAndRescales) {
  Rng rng(7);
  const Tensor<double> x = random_tensor({100, 10}, rng);
  Rng drop_rng(42);
  const Tensor<double> y = dropout<double>(nullptr, x, 0.5, drop_rng);
  std::size_t kept = 0;
  for (std::size_t i = 0; i < x.numel(); ++i) {
    if (y.data()[i] != 0.0) {
      EXPECT_DOUBLE_EQ(y.data()[i], 2.0 * x.data()[i]);
      ++kept;
    }
  }
  EXPECT_NEAR(static_cast<double>(kept) / x.numel(), 0.5, 0.05);
}

TEST(TensorOps, SparseRowMixMatchesDense) {
  auto s = std::make_shared<SparseMix>();
  s->rows = 2;
  s->cols = 3;
  s->offsets = {0, 2, 3};
  s->index = {0, 2, 1};
  s->weight = {0.25, 0.75, 1.0};
  s->finalize();
  const Tensor<double> x = Tensor<double>::from({3, 2}, {1, 2, 3, 4, 5, 6});
  const Tensor<double> y = sparse_row_mix<double>(nullptr, s, x);
  ASSERT_EQ(y.shape(), (Shape{2, 2}));
  EXPECT_DOUBLE_EQ(y.data()[0], 0.25 * 1 + 0.75 * 5);
  EXPECT_DOUBLE_EQ(y.data()[1], 0.25 * 2 + 0.75 * 6);
  EXPECT_DOUBLE_EQ(y.data()[2], 3.0);
  EXPECT_DOUBLE_EQ(y.data()[3], 4.0);
}

TEST(TensorOps, FixedSeedIsBitIdentical) {
  auto run = [] {
    Rng rng(123);
    Tensor<float> x = Tensor<float>::zeros({8, 8});
    for (auto& v : x.values()) v = static_cast<float>(rng.normal());
    Rng drop(9);
    Tensor<float> y = dropout<float>(nullptr, x, 0.8, drop);
    Tensor<float> w = Tensor<float>::zeros({8, 8});
    for (auto& v : w.values()) v = static_cast<float>(rng.normal());
    return matmul<float>(nullptr, y, w).values();
  };
  EXPECT_EQ(run(), run());
}

// Copyright 2026 The Lie-Sensor Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "oracles.hpp"

#include <cmath>
#include <memory>

#include "liesensor/cnn/network.hpp"

namespace liesensor::test {

using features::SparseVector;

double rel_err(double a, double b) {
  const double d = std::abs(a - b);
  return d <= 1e-7 ? 0.0 : d / std::max(std::abs(a), std::abs(b));
}

EmotionScores brute_force_posterior(std::span<const SparseVector> X, std::span<const EmotionLabel> y,
                                    double alpha, const std::vector<int>& x) {
  const std::size_t V = X[0].dimension;
  std::array<long double, 4> score{};
  for (std::size_t c = 0; c < 4; ++c) {
    long double docs = 0, total = 0;
    std::vector<long double> count(V, 0);
    for (std::size_t i = 0; i < X.size(); ++i) {
      if (index_of(y[i]) != c) continue;
      docs += 1;
      const auto d = X[i].to_dense();
      for (std::size_t t = 0; t < V; ++t) {
        count[t] += d[t];
        total += d[t];
      }
    }
    long double p = docs / static_cast<long double>(X.size());
    for (std::size_t t = 0; t < V; ++t) {
      const long double pt = (count[t] + alpha) / (total + alpha * static_cast<long double>(V));
      for (int k = 0; k < x[t]; ++k) p *= pt;
    }
    score[c] = p;
  }
  const long double z = score[0] + score[1] + score[2] + score[3];
  return {static_cast<double>(score[0] / z), static_cast<double>(score[1] / z),
          static_cast<double>(score[2] / z), static_cast<double>(score[3] / z)};
}

OracleRun naive_bayes_oracle(std::uint64_t seed) {
  Rng rng(seed);
  OracleRun run;
  for (std::size_t V = 1; V <= 5; ++V) {
    for (int trial = 0; trial < 20; ++trial) {
      const std::size_t N = 4 + rng.index(7);
      std::vector<SparseVector> X;
      std::vector<EmotionLabel> y;
      for (std::size_t i = 0; i < N; ++i) {
        std::vector<double> v(V);
        for (auto& e : v) e = static_cast<double>(rng.index(4));
        X.push_back(SparseVector::from_dense(v));
        X.back().dimension = V;
        y.push_back(label_at(i < 4 ? i : rng.index(4)));
      }
      const double alpha = 0.25 + rng.uniform() * 2;
      const auto model = textclf::train_naive_bayes(X, y, alpha);
      std::vector<int> x(V, 0);
      for (;;) {
        std::vector<SparseVector::Entry> pairs;
        for (std::size_t t = 0; t < V; ++t)
          if (x[t]) pairs.push_back({static_cast<std::uint32_t>(t), static_cast<double>(x[t])});
        const auto got = textclf::predict_text(textclf::TextModel(model), SparseVector::from_pairs(V, pairs));
        const auto want = brute_force_posterior(X, y, alpha, x);
        for (std::size_t c = 0; c < 4; ++c) {
          const double err = std::abs(got.scores[c] - want[c]);
          run.worst_abs = std::max(run.worst_abs, err);
          if (err > run.worst) {
            run.worst = err;
            run.where = "V=" + std::to_string(V) + " trial " + std::to_string(trial);
          }
        }
        ++run.cases;
        std::size_t t = 0;
        while (t < V && ++x[t] == 3) x[t++] = 0;
        if (t == V) break;
      }
    }
  }
  return run;
}

OracleRun linear_gradient_oracle(textclf::LinearKind kind, int instances, std::uint64_t seed) {
  using namespace textclf;
  Rng rng(seed);
  OracleRun run;
  for (int trial = 0; trial < instances; ++trial) {
    const std::size_t V = 1 + rng.index(8);
    auto m = LinearModel::zeros(kind, V);
    for (auto& row : m.weights)
      for (auto& w : row) w = rng.normal();
    for (auto& b : m.bias) b = rng.normal();
    std::vector<SparseVector> X;
    std::vector<EmotionLabel> y;
    for (int i = 0; i < 3; ++i) {
      std::vector<double> v(V);
      for (auto& e : v) e = rng.uniform(-2, 2);
      X.push_back(SparseVector::from_dense(v));
      X.back().dimension = V;
      y.push_back(label_at(rng.index(4)));
    }
    const double lambda = rng.uniform(0, 0.5);
    const auto obj = linear_objective(m, X, y, lambda);
    const double eps = 1e-6;
    for (std::size_t c = 0; c < 4; ++c) {
      for (std::size_t j = 0; j <= V; ++j) {
        double& p = j < V ? m.weights[c][j] : m.bias[c];
        const double keep = p;
        p = keep + eps;
        const double up = linear_objective(m, X, y, lambda).loss;
        p = keep - eps;
        const double down = linear_objective(m, X, y, lambda).loss;
        p = keep;
        const double analytic = j < V ? obj.grad_weights[c][j] : obj.grad_bias[c];
        run.worst_abs = std::max(run.worst_abs, std::abs(analytic - (up - down) / (2 * eps)));
        const double err = rel_err(analytic, (up - down) / (2 * eps));
        if (err > run.worst) {
          run.worst = err;
          run.where = "trial " + std::to_string(trial) + " class " + std::to_string(c) + " coord " + std::to_string(j);
        }
      }
    }
    ++run.cases;
  }
  return run;
}

Tensor random_tensor(std::vector<std::size_t> shape, Rng& rng, double scale) {
  Tensor t(std::move(shape));
  for (auto& v : t.data) v = scale * (2 * rng.uniform() - 1);
  return t;
}

void fill_random(cnn::Param& p, Rng& rng, double scale) {
  for (auto& v : p.value.data) v = scale * (2 * rng.uniform() - 1);
}

namespace {

double dot(const Tensor& a, const Tensor& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void merge(OracleRun& into, const OracleRun& r, const std::string& what) {
  into.cases += r.cases;
  into.worst_abs = std::max(into.worst_abs, r.worst_abs);
  if (r.worst > into.worst || into.where.empty()) {
    into.worst = r.worst;
    into.where = what + " " + r.where;
  }
}

}  // namespace

OracleRun layer_gradient_oracle(cnn::Layer& layer, Tensor x, Rng& rng) {
  OracleRun run;
  const Tensor r = random_tensor(layer.forward(x).shape, rng);
  for (auto* p : layer.params()) std::fill(p->grad.data.begin(), p->grad.data.end(), 0.0);
  layer.forward(x);
  const Tensor dx = layer.backward(r);
  const double eps = 1e-5;
  auto loss = [&] { return dot(layer.forward(x), r); };
  auto probe = [&](double& v, double analytic, const std::string& where) {
    const double keep = v;
    v = keep + eps;
    const double up = loss();
    v = keep - eps;
    const double down = loss();
    v = keep;
    const double err = rel_err(analytic, (up - down) / (2 * eps));
    run.worst_abs = std::max(run.worst_abs, std::abs(analytic - (up - down) / (2 * eps)));
    if (err > run.worst) {
      run.worst = err;
      run.where = where;
    }
  };
  for (std::size_t i = 0; i < x.size(); ++i) probe(x[i], dx[i], "dx[" + std::to_string(i) + "]");
  for (auto* p : layer.params()) {
    if (!p->trainable) continue;
    for (std::size_t i = 0; i < p->value.size(); ++i)
      probe(p->value[i], p->grad[i], p->name + "[" + std::to_string(i) + "]");
  }
  run.cases = 1;
  return run;
}

OracleRun all_layer_gradients(int instances, std::uint64_t seed) {
  using namespace cnn;
  Rng rng(seed);
  OracleRun all;
  for (int inst = 0; inst < instances; ++inst) {
    const std::size_t cin = 1 + rng.index(3), cout = 2 + rng.index(2);
    const std::size_t h = 3 + rng.index(4), w = 3 + rng.index(4), n = 1 + rng.index(3);
    {
      Conv2D conv("conv", 1 + 2 * rng.index(2), cin, cout, 1 + rng.index(2),
                  rng.coin() ? Padding::Same : Padding::Valid, rng.coin(), 0);
      fill_random(conv.kernel(), rng);
      if (conv.has_bias()) fill_random(conv.bias(), rng);
      merge(all, layer_gradient_oracle(conv, random_tensor({n, h, w, cin}, rng), rng), "conv");
    }
    {
      SepConv2D sep("sep", 3, cin, cout, 0);
      fill_random(sep.depthwise(), rng);
      fill_random(sep.pointwise(), rng);
      merge(all, layer_gradient_oracle(sep, random_tensor({n, h, w, cin}, rng), rng), "sepconv");
    }
    {
      BatchNorm bn("bn", cin);
      fill_random(bn.gamma(), rng);
      fill_random(bn.beta(), rng);
      merge(all, layer_gradient_oracle(bn, random_tensor({n + 1, h, w, cin}, rng, 2.0), rng), "bn");
    }
    {
      MaxPool pool("pool", 3, 2);
      merge(all, layer_gradient_oracle(pool, random_tensor({n, h, w, cin}, rng), rng), "maxpool");
    }
    {
      ReLU relu("relu");
      merge(all, layer_gradient_oracle(relu, random_tensor({n, h, w, cin}, rng), rng), "relu");
    }
    {
      GlobalAvgPool gap("gap");
      merge(all, layer_gradient_oracle(gap, random_tensor({n, h, w, cin}, rng), rng), "gap");
    }
    {
      std::vector<LayerPtr> main, skip;
      main.push_back(std::make_unique<SepConv2D>("r.sep", 3, cin, cout, 0));
      main.push_back(std::make_unique<MaxPool>("r.pool", 3, 2));
      skip.push_back(std::make_unique<Conv2D>("r.skip", 1, cin, cout, 2, Padding::Same, false, 0));
      Residual res("res", std::move(main), std::move(skip));
      for (auto* p : res.params()) fill_random(*p, rng);
      merge(all, layer_gradient_oracle(res, random_tensor({n, h, w, cin}, rng), rng), "residual");
    }
    {
      Tensor logits = random_tensor({n, 4}, rng, 3.0);
      std::vector<EmotionLabel> labels(n);
      for (auto& l : labels) l = label_at(rng.index(4));
      const auto s = softmax_cross_entropy(logits, labels);
      OracleRun head;
      for (std::size_t i = 0; i < logits.size(); ++i) {
        const double keep = logits[i];
        logits[i] = keep + 1e-5;
        const double up = softmax_cross_entropy(logits, labels).loss;
        logits[i] = keep - 1e-5;
        const double down = softmax_cross_entropy(logits, labels).loss;
        logits[i] = keep;
        const double err = rel_err(s.grad_logits[i], (up - down) / 2e-5);
        head.worst_abs = std::max(head.worst_abs, std::abs(s.grad_logits[i] - (up - down) / 2e-5));
        if (err > head.worst) {
          head.worst = err;
          head.where = "logit " + std::to_string(i);
        }
      }
      head.cases = 1;
      merge(all, head, "softmax");
    }
  }
  return all;
}

std::uint64_t brute_sum(const vision::GrayImage& img, int x, int y, int w, int h, bool square) {
  std::uint64_t s = 0;
  for (int j = y; j < y + h; ++j)
    for (int i = x; i < x + w; ++i) {
      const std::uint64_t p = img.at(i, j);
      s += square ? p * p : p;
    }
  return s;
}

namespace {

int round_half_up(double v) { return static_cast<int>(std::floor(v + 0.5)); }

}  // namespace

std::vector<vision::BoundingBox> exhaustive_windows(const vision::GrayImage& img, const vision::Cascade& c,
                                                    double min_stddev) {
  using vision::HaarRect;
  std::vector<vision::BoundingBox> out;
  for (double s = 1.0;; s *= 1.1) {
    const int ww = round_half_up(c.window_w * s), wh = round_half_up(c.window_h * s);
    if (ww > img.width || wh > img.height) break;
    auto scaled = [&](const HaarRect& r) {
      const int x0 = round_half_up(r.x * s), y0 = round_half_up(r.y * s);
      return HaarRect{x0, y0, round_half_up((r.x + r.w) * s) - x0, round_half_up((r.y + r.h) * s) - y0, r.weight};
    };
    const HaarRect norm = scaled({1, 1, c.window_w - 2, c.window_h - 2, 1.0});
    for (int y = 0; y + wh <= img.height; ++y)
      for (int x = 0; x + ww <= img.width; ++x) {
        const double area = static_cast<double>(norm.w) * norm.h;
        const double sum = static_cast<double>(brute_sum(img, x + norm.x, y + norm.y, norm.w, norm.h));
        const double sq = static_cast<double>(brute_sum(img, x + norm.x, y + norm.y, norm.w, norm.h, true));
        const double var = area * sq - sum * sum;
        if (var <= 0 || std::sqrt(var) / area < min_stddev) continue;
        const double nf = std::sqrt(var);
        bool pass = true;
        for (const auto& stage : c.stages) {
          double acc = 0;
          for (const auto& weak : stage.weak) {
            double f = 0;
            for (const auto& r : weak.rects) {
              const auto q = scaled(r);
              f += q.weight * static_cast<double>(brute_sum(img, x + q.x, y + q.y, q.w, q.h));
            }
            acc += f / nf < weak.threshold ? weak.left_value : weak.right_value;
          }
          if (acc < stage.threshold) {
            pass = false;
            break;
          }
        }
        if (pass) out.push_back({x, y, ww, wh, static_cast<int>(c.stages.size()), 1});
      }
  }
  return out;
}

vision::Cascade centre_cascade() {
  vision::Cascade c;
  c.window_w = c.window_h = 8;
  c.stages.push_back({0.5, {{{{2, 2, 4, 4, 1.0}}, 1e-9, 0.0, 1.0}}});
  return c;
}

vision::Cascade random_cascade(Rng& rng) {
  vision::Cascade c;
  c.window_w = c.window_h = 8;
  for (int s = 0; s < 2; ++s) {
    vision::CascadeStage st;
    for (int k = 0; k < 3; ++k) {
      vision::WeakClassifier w;
      for (int r = 0; r < 2; ++r) {
        const int x = static_cast<int>(rng.index(7)), y = static_cast<int>(rng.index(7));
        const int rw = 1 + static_cast<int>(rng.index(8 - x)), rh = 1 + static_cast<int>(rng.index(8 - y));
        w.rects.push_back({x, y, rw, rh, r == 0 ? 1.0 : -0.5 - 0.1 * static_cast<double>(rng.index(5))});
      }
      w.threshold = rng.uniform() - 0.5;
      w.left_value = -1;
      w.right_value = 1;
      st.weak.push_back(w);
    }
    st.threshold = -1.5;
    c.stages.push_back(st);
  }
  return c;
}

}  // namespace liesensor::test

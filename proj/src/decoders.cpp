#include "trpkgc/decoders.hpp"

#include "trpkgc/errors.hpp"

#include <cmath>

namespace trpkgc {

namespace {

void require(bool ok, const char* what) {
    if (!ok) {
        throw ShapeError(what);
    }
}

Mat as_row(const Vec& v) {
    return v.transpose();
}

Mat tucker_contract(const TuckerCore& core, const Mat& head, const Mat& relation, Mat* contracted_out) {
    const Index d = core.dim();
    require(head.cols() == d && relation.cols() == d, "tucker: query width must equal core dimension");
    // Mode-1 with the head, then mode-2 with the relation, per query.
    Mat contracted = head * core.core;
    Mat query(head.rows(), d);
    for (Index b = 0; b < head.rows(); ++b) {
        const Eigen::Map<const Mat> slice(contracted.row(b).data(), d, d);
        query.row(b) = relation.row(b) * slice;
    }
    if (contracted_out) {
        *contracted_out = std::move(contracted);
    }
    return query;
}

Mat complex_query(const Mat& head, const Mat& relation, bool conjugate_tail) {
    require(head.cols() % 2 == 0, "complex: embedding width must be even");
    const Index half = head.cols() / 2;
    const auto hr = head.leftCols(half).array();
    const auto hi = head.rightCols(half).array();
    const auto rr = relation.leftCols(half).array();
    const auto ri = relation.rightCols(half).array();
    Mat q(head.rows(), head.cols());
    q.leftCols(half) = (rr * hr - ri * hi).matrix();
    q.rightCols(half) = (rr * hi + ri * hr).matrix();
    if (!conjugate_tail) {
        q.rightCols(half) *= -1.0;
    }
    return q;
}

Mat mlp_query(const MlpDecoderParams& p, const Mat& head, const Mat& relation, Mat* hidden_pre_out) {
    const Index d = head.cols();
    require(p.w1.cols() == 2 * d && p.w2.rows() == d && p.w2.cols() == p.w1.rows(), "mlp: parameter shape mismatch");
    Mat joined(head.rows(), 2 * d);
    joined << head, relation;
    Mat pre = joined * p.w1.transpose();
    pre.rowwise() += p.b1.transpose();
    Mat q = pre.cwiseMax(0.0) * p.w2.transpose();
    q.rowwise() += p.b2.transpose();
    if (hidden_pre_out) {
        *hidden_pre_out = std::move(pre);
    }
    return q;
}

Mat uniform_matrix(Index rows, Index cols, double bound, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(-bound, bound);
    Mat m(rows, cols);
    for (Index i = 0; i < m.size(); ++i) {
        m.data()[i] = dist(rng);
    }
    return m;
}

}  // namespace

std::string_view to_string(DecoderKind kind) {
    switch (kind) {
    case DecoderKind::Tucker: return "tucker";
    case DecoderKind::Mlp: return "mlp";
    case DecoderKind::TransE: return "transe";
    case DecoderKind::DistMult: return "distmult";
    case DecoderKind::ComplEx: return "complex";
    }
    return "unknown";
}

DecoderKind parse_decoder_kind(std::string_view name) {
    for (auto kind : {DecoderKind::Tucker, DecoderKind::Mlp, DecoderKind::TransE, DecoderKind::DistMult,
                      DecoderKind::ComplEx}) {
        if (to_string(kind) == name) {
            return kind;
        }
    }
    throw std::invalid_argument("unknown decoder '" + std::string(name) + "'");
}

DecoderParams init_decoder(DecoderKind kind, Index dim, std::mt19937_64& rng) {
    DecoderParams p;
    p.kind = kind;
    if (kind == DecoderKind::Tucker) {
        p.tucker = TuckerCore{uniform_matrix(dim, dim * dim, 1.0, rng) / static_cast<double>(dim)};
    } else if (kind == DecoderKind::Mlp) {
        const Index hidden = 2 * dim;
        std::normal_distribution<double> n1(0.0, 1.0 / std::sqrt(static_cast<double>(2 * dim)));
        std::normal_distribution<double> n2(0.0, 1.0 / std::sqrt(static_cast<double>(hidden)));
        MlpDecoderParams m{Mat(hidden, 2 * dim), Vec::Zero(hidden), Mat(dim, hidden), Vec::Zero(dim)};
        for (Index i = 0; i < m.w1.size(); ++i) {
            m.w1.data()[i] = n1(rng);
        }
        for (Index i = 0; i < m.w2.size(); ++i) {
            m.w2.data()[i] = n2(rng);
        }
        p.mlp = std::move(m);
    } else if (kind == DecoderKind::ComplEx) {
        require(dim % 2 == 0, "complex decoder needs an even embedding dimension");
    }
    return p;
}

DecoderParams zeros_like(const DecoderParams& p) {
    DecoderParams g;
    g.kind = p.kind;
    g.conjugate_tail = p.conjugate_tail;
    if (p.tucker) {
        g.tucker = TuckerCore{Mat::Zero(p.tucker->core.rows(), p.tucker->core.cols())};
    }
    if (p.mlp) {
        const auto& m = *p.mlp;
        g.mlp = MlpDecoderParams{Mat::Zero(m.w1.rows(), m.w1.cols()), Vec::Zero(m.b1.size()),
                                 Mat::Zero(m.w2.rows(), m.w2.cols()), Vec::Zero(m.b2.size())};
    }
    return g;
}

void append_tensors(DecoderParams& p, std::vector<TensorRef>& out) {
    if (p.tucker) {
        out.push_back(tensor_ref("decoder.tucker_core", p.tucker->core));
    }
    if (p.mlp) {
        out.push_back(tensor_ref("decoder.mlp.w1", p.mlp->w1));
        out.push_back(tensor_ref("decoder.mlp.b1", p.mlp->b1));
        out.push_back(tensor_ref("decoder.mlp.w2", p.mlp->w2));
        out.push_back(tensor_ref("decoder.mlp.b2", p.mlp->b2));
    }
}

Mat decoder_forward(const DecoderParams& p, const Mat& head, const Mat& relation, const Mat& entities,
                    DecoderCache* cache) {
    require(head.rows() == relation.rows() && head.cols() == relation.cols(), "decoder: head/relation shape mismatch");
    require(entities.cols() == head.cols(), "decoder: entity table width mismatch");
    Mat query;
    Mat contracted;
    Mat hidden_pre;
    Mat scores;
    Mat distance;
    switch (p.kind) {
    case DecoderKind::Tucker:
        require(p.tucker.has_value(), "decoder: missing Tucker core");
        query = tucker_contract(*p.tucker, head, relation, cache ? &contracted : nullptr);
        break;
    case DecoderKind::Mlp:
        require(p.mlp.has_value(), "decoder: missing MLP parameters");
        query = mlp_query(*p.mlp, head, relation, cache ? &hidden_pre : nullptr);
        break;
    case DecoderKind::DistMult:
        query = (head.array() * relation.array()).matrix();
        break;
    case DecoderKind::ComplEx:
        query = complex_query(head, relation, p.conjugate_tail);
        break;
    case DecoderKind::TransE: {
        query = head + relation;
        distance.resize(head.rows(), entities.rows());
        for (Index b = 0; b < query.rows(); ++b) {
            for (Index t = 0; t < entities.rows(); ++t) {
                distance(b, t) = (query.row(b) - entities.row(t)).norm();
            }
        }
        scores = -distance;
        break;
    }
    }
    if (p.kind != DecoderKind::TransE) {
        scores = query * entities.transpose();
    }
    if (cache) {
        *cache = {head, relation, std::move(query), std::move(contracted), std::move(hidden_pre), std::move(distance)};
    }
    return scores;
}

DecoderInputGrads decoder_backward(const DecoderParams& p, const DecoderCache& cache, const Mat& entities,
                                   const Mat& grad_scores, DecoderParams& grads, Mat& grad_entities) {
    const Mat& h = cache.head;
    const Mat& r = cache.relation;
    Mat grad_query;
    if (p.kind == DecoderKind::TransE) {
        // d(-||q - e||)/dq = -(q - e)/||q - e||; zero distance contributes nothing.
        const Mat coeff = (grad_scores.array() / cache.distance.array())
                              .unaryExpr([](double v) { return std::isfinite(v) ? v : 0.0; })
                              .matrix();
        const Vec row_total = coeff.rowwise().sum();
        const Vec col_total = coeff.colwise().sum().transpose();
        grad_query = coeff * entities - (cache.query.array().colwise() * row_total.array()).matrix();
        grad_entities += coeff.transpose() * cache.query - (entities.array().colwise() * col_total.array()).matrix();
        return {grad_query, grad_query};
    }

    grad_query = grad_scores * entities;
    grad_entities += grad_scores.transpose() * cache.query;

    switch (p.kind) {
    case DecoderKind::Tucker: {
        const Index d = p.tucker->dim();
        Mat grad_contracted(h.rows(), d * d);
        Mat grad_r(h.rows(), d);
        for (Index b = 0; b < h.rows(); ++b) {
            const Eigen::Map<const Mat> slice(cache.contracted.row(b).data(), d, d);
            Eigen::Map<Mat> grad_slice(grad_contracted.row(b).data(), d, d);
            grad_slice.noalias() = r.row(b).transpose() * grad_query.row(b);
            grad_r.row(b) = (slice * grad_query.row(b).transpose()).transpose();
        }
        grads.tucker->core.noalias() += h.transpose() * grad_contracted;
        Mat grad_h = grad_contracted * p.tucker->core.transpose();
        return {std::move(grad_h), std::move(grad_r)};
    }
    case DecoderKind::Mlp: {
        const auto& m = *p.mlp;
        auto& gm = *grads.mlp;
        const Mat hidden = cache.hidden_pre.cwiseMax(0.0);
        gm.w2 += grad_query.transpose() * hidden;
        gm.b2 += grad_query.colwise().sum().transpose();
        const Mat grad_pre =
            ((grad_query * m.w2).array() * (cache.hidden_pre.array() > 0.0).cast<double>()).matrix();
        Mat joined(h.rows(), 2 * h.cols());
        joined << h, r;
        gm.w1 += grad_pre.transpose() * joined;
        gm.b1 += grad_pre.colwise().sum().transpose();
        const Mat grad_joined = grad_pre * m.w1;
        return {grad_joined.leftCols(h.cols()), grad_joined.rightCols(h.cols())};
    }
    case DecoderKind::DistMult:
        return {(grad_query.array() * r.array()).matrix(), (grad_query.array() * h.array()).matrix()};
    case DecoderKind::ComplEx: {
        const Index half = h.cols() / 2;
        const Mat gre = grad_query.leftCols(half);
        const Mat gim = p.conjugate_tail ? Mat(grad_query.rightCols(half)) : Mat(-grad_query.rightCols(half));
        const auto hr = h.leftCols(half).array();
        const auto hi = h.rightCols(half).array();
        const auto rr = r.leftCols(half).array();
        const auto ri = r.rightCols(half).array();
        Mat grad_h(h.rows(), h.cols());
        Mat grad_r(h.rows(), h.cols());
        grad_h.leftCols(half) = (gre.array() * rr + gim.array() * ri).matrix();
        grad_h.rightCols(half) = (-gre.array() * ri + gim.array() * rr).matrix();
        grad_r.leftCols(half) = (gre.array() * hr + gim.array() * hi).matrix();
        grad_r.rightCols(half) = (-gre.array() * hi + gim.array() * hr).matrix();
        return {std::move(grad_h), std::move(grad_r)};
    }
    case DecoderKind::TransE:
        break;
    }
    return {};
}

Vec tucker_score_all(const Vec& head, const Vec& relation, const Mat& entities, const TuckerCore& core) {
    require(core.core.cols() == core.dim() * core.dim(), "tucker: core must be [d x d*d]");
    require(entities.cols() == core.dim(), "tucker: entity table width mismatch");
    const Mat q = tucker_contract(core, as_row(head), as_row(relation), nullptr);
    return (entities * q.transpose()).col(0);
}

Vec mlp_score_all(const Vec& head, const Vec& relation, const Mat& entities, const MlpDecoderParams& p) {
    require(head.size() == relation.size() && entities.cols() == head.size(), "mlp: dimension mismatch");
    const Mat q = mlp_query(p, as_row(head), as_row(relation), nullptr);
    return (entities * q.transpose()).col(0);
}

Vec transe_score_all(const Vec& head, const Vec& relation, const Mat& entities) {
    DecoderParams p;
    p.kind = DecoderKind::TransE;
    return decoder_forward(p, as_row(head), as_row(relation), entities, nullptr).row(0).transpose();
}

Vec distmult_score_all(const Vec& head, const Vec& relation, const Mat& entities) {
    DecoderParams p;
    p.kind = DecoderKind::DistMult;
    return decoder_forward(p, as_row(head), as_row(relation), entities, nullptr).row(0).transpose();
}

Vec complex_score_all(const Vec& head, const Vec& relation, const Mat& entities, bool conjugate_tail) {
    DecoderParams p;
    p.kind = DecoderKind::ComplEx;
    p.conjugate_tail = conjugate_tail;
    return decoder_forward(p, as_row(head), as_row(relation), entities, nullptr).row(0).transpose();
}

}  // namespace trpkgc

#pragma once

#include <Eigen/Dense>

namespace ehlab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline Vec vec1(double x) {
    Vec v(1);
    v[0] = x;
    return v;
}

inline Vec vec2(double x, double y) {
    Vec v(2);
    v[0] = x;
    v[1] = y;
    return v;
}

inline Mat mat1(double x) {
    Mat m(1, 1);
    m(0, 0) = x;
    return m;
}

} // namespace ehlab

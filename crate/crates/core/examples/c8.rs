use fockmodel_core::charfn::{char_fn, defects};
use fockmodel_core::dilation::build_dilation;
use fockmodel_core::model::{model_embedding, model_from_theta};
use fockmodel_core::numerics::*;
use fockmodel_core::rowcontraction::RowContraction;
use rand::{Rng, SeedableRng};

fn main() {
    let tol = Tolerance::default();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    // replay the same RNG consumption as before to hit the same fixture
    for _ in 0..6 { let d = rng.gen_range(1..=3usize); for _ in 0..2 { let _ = CMatrix::from_fn(d, d, |_,_| cplx(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))); } }
    for _ in 0..4 { let _ = CMatrix::from_fn(3, 3, |_,_| cplx(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))); }
    let d = 4usize;
    let starts = [0usize, 1, 2, 4];
    let mut mk = |rng: &mut rand_chacha::ChaCha8Rng| {
        let mut m = CMatrix::zeros(d, d);
        for bi in 0..2 {
            for bj in (bi + 1)..3 {
                for rr in starts[bi]..starts[bi + 1] {
                    for cc in starts[bj]..starts[bj + 1] {
                        m[(rr, cc)] = cplx(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                    }
                }
            }
        }
        m
    };
    let raw: Vec<CMatrix> = (0..2).map(|_| mk(&mut rng)).collect();
    let s = op_norm(&fockmodel_core::rowcontraction::phi_map(&raw, &CMatrix::identity(d, d))).sqrt();
    let t: Vec<CMatrix> = raw.iter().map(|m| m.scale(1.0 / (s * 1.1))).collect();
    let rc = RowContraction::new(t, tol).unwrap();
    println!("row norm of tuple: {:.6}", op_norm(&rc.phi_iterate(1)));
    let row = rc.row_matrix();
    println!("||T||^2 = {:.6}", op_norm(&(row.adjoint() * &row)));
    let def = defects(&rc);
    println!("defects: {:?}", def.as_ref().map(|d| (d.d.dim(), d.d_star.dim())).map_err(|e| e.to_string()));
    let theta = char_fn(&rc, 4).unwrap();
    println!("theta dims {}x{} deg {} norm {:.6}", theta.dim_out(), theta.dim_in(), theta.deg(), theta.truncated_norm(4).unwrap());
    let model = model_from_theta(&theta, 4, &tol);
    match &model {
        Ok(m) => println!("model ok dimH={}", m.space.dim_h_bold()),
        Err(e) => println!("model err: {e}"),
    }
    let ds = build_dilation(&rc, 5).unwrap();
    match model_embedding(&ds, &model.unwrap(), &tol) {
        Ok(e) => println!("embed ok residuals {:.2e} {:.2e}", e.image_residual, e.isometry_residual),
        Err(e) => println!("embed err: {e}"),
    }
}

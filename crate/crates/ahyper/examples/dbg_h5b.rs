use ahyper::closedforms::*;
use ahyper::pseries::*;
use ahyper::scalars::*;

fn main() {
    let fam = lookup("h5", None, None).unwrap();
    let r = rat(1, 3);
    let ctx = EvalCtx { grid: &fam.grid, order: 16, r: &r, slots: &fam.slots, assignment: &[Branch::Plus] };
    let f = eval_recipe(fam.recipe_f.as_ref().unwrap(), &ctx).unwrap();
    println!("f order {}", f.order());
    for k in 0..=15i64 {
        let c = f.coeff_abs(&[rint(0), Rat::new(k.into(), 2.into())]);
        if !c.is_zero() { println!("f[y^{k}/2] = {c}"); }
    }
    let fr = f.pow_rational(&r, Branch::Plus).unwrap();
    println!("f^r order {}", fr.order());
    for k in [1i64, 3, 11, 13] {
        let c = fr.coeff_abs(&[rint(0), Rat::new(k.into(), 2.into())]);
        println!("f^r[y^{k}/2] = {c}");
    }
}

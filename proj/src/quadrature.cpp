#include "decoh/quadrature.hpp"

namespace decoh::quadrature {

namespace {

// Abscissae and weights from QUADPACK dqk61. xgk[2j+1] are the 30-point
// Gauss nodes with weights wg[j]; xgk[30] = 0 is the center.
constexpr std::array<double, 31> xgk = {
    .999484410050490637571325895705811, .996893484074649540271630050918695,
    .991630996870404594858628366109486, .983668123279747209970032581605663,
    .973116322501126268374693868423707, .960021864968307512216871025581798,
    .944374444748559979415831324037439, .926200047429274325879324277080474,
    .905573307699907798546522558925958, .882560535792052681543116462530226,
    .857205233546061098958658510658944, .829565762382768397442898119732502,
    .799727835821839083013668942322683, .767777432104826194917977340974503,
    .733790062453226804726171131369528, .69785049479331579693229238802664,
    .660061064126626961370053668149271, .620526182989242861140477556431189,
    .57934523582636169175602493217254,  .536624148142019899264169793311073,
    .492480467861778574993693061207709, .447033769538089176780609900322854,
    .400401254830394392535476211542661, .352704725530878113471037207089374,
    .304073202273625077372677107199257, .254636926167889846439805129817805,
    .204525116682309891438957671002025, .153869913608583546963794672743256,
    .102806937966737030147096751318001, .051471842555317695833025213166723,
    0.0};

constexpr std::array<double, 31> wgk = {
    .00138901369867700762455159122676,  .003890461127099884051267201844516,
    .00663070391593129217331982636975,  .009273279659517763428441146892024,
    .011823015253496341742232898853251, .01436972950704580481245143244358,
    .016920889189053272627572289420322, .019414141193942381173408951050128,
    .021828035821609192297167485738339, .024191162078080601365686370725232,
    .026509954882333101610601709335075, .028754048765041292843978785354334,
    .030907257562387762472884252943092, .032981447057483726031814191016854,
    .034979338028060024137499670731468, .036882364651821229223911065617136,
    .038678945624727592950348651532281, .040374538951535959111995279752468,
    .04196981021516424614714754128597,  .043452539701356069316831728117073,
    .044814800133162663192355551616723, .046059238271006988116271735559374,
    .047185546569299153945261478181099, .048185861757087129140779492298305,
    .049055434555029778887528165367238, .049795683427074206357811569379942,
    .050405921402782346840893085653585, .050881795898749606492297473049805,
    .051221547849258772170656282604944, .051426128537459025933862879215781,
    .051494729429451567558340433647099};

constexpr std::array<double, 15> wg = {
    .007968192496166605615465883474674, .018466468311090959142302131912047,
    .028784707883323369349719179611292, .038799192569627049596801936446348,
    .048402672830594052902938140422808, .057493156217619066481721689402056,
    .065974229882180495128128515115962, .073755974737705206268243850022191,
    .08075589522942021535469493846053,  .086899787201082979802387530715126,
    .092122522237786128717632707087619, .09636873717464425963946862635181,
    .099593420586795267062780282103569, .101762389748405504596428952168554,
    .102852652893558840341285636705415};

Gk61 build() {
    Gk61 r{};
    for (std::size_t i = 0; i < 30; ++i) {
        const double gw = (i % 2 == 1) ? wg[i / 2] : 0.0;
        r.node[i] = -xgk[i];
        r.kronrod_weight[i] = wgk[i];
        r.gauss_weight[i] = gw;
        r.node[60 - i] = xgk[i];
        r.kronrod_weight[60 - i] = wgk[i];
        r.gauss_weight[60 - i] = gw;
    }
    r.node[30] = 0.0;
    r.kronrod_weight[30] = wgk[30];
    r.gauss_weight[30] = 0.0;
    return r;
}

}  // namespace

const Gk61& gk61() {
    static const Gk61 rule = build();
    return rule;
}

}  // namespace decoh::quadrature

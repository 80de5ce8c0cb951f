import java.util.ArrayList;
import java.util.List;

public class OrderReport {
    public static String gen(List<double[]> d) {
        String r = "";
        double t = 0;
        for (int i = 0; i < d.size(); i++) {
            double[] o = d.get(i);
            double p = o[0] * o[1];
            if (o[2] == 1) { p = p - p * 0.05; }
            if (o[2] == 2) { p = p - p * 0.1; }
            if (o[2] == 3) { p = p - p * 0.15; }
            t = t + p;
            r = r + "item " + i + ": " + p + "\n";
        }
        r = r + "total: " + t + "\n";
        if (t > 1000) { r = r + "big order\n"; }
        return r;
    }

    public static void main(String[] args) {
        List<double[]> d = new ArrayList<>();
        d.add(new double[] { 3, 19.99, 1 });
        d.add(new double[] { 1, 250.0, 3 });
        d.add(new double[] { 7, 4.25, 0 });
        System.out.print(gen(d));
    }
}
